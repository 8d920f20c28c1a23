#include "oracles.hpp"

#include "nodal/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>

using namespace nodal;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("nodal_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double rel(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) {
    return 0;
  }
  return a == b ? 0 : std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

void check_same(const StationarySolution &a, const StationarySolution &b) {
  CHECK(a.p == b.p);
  CHECK(a.K == b.K);
  CHECK(rel(a.tol, b.tol) < 1e-14);
  CHECK(rel(a.u_max, b.u_max) < 1e-14);
  CHECK(rel(a.u_min, b.u_min) < 1e-14);
  CHECK(rel(a.r_min, b.r_min) < 1e-14);
  CHECK(rel(a.log_mu_plus, b.log_mu_plus) < 1e-14);
  CHECK(rel(a.log_mu_minus, b.log_mu_minus) < 1e-14);
  REQUIRE(a.nodal_radii.size() == b.nodal_radii.size());
  for (std::size_t i = 0; i < a.nodal_radii.size(); ++i) {
    CHECK(rel(a.nodal_radii[i], b.nodal_radii[i]) < 1e-14);
  }
  REQUIRE(a.extrema.size() == b.extrema.size());
  for (std::size_t i = 0; i < a.extrema.size(); ++i) {
    CHECK(rel(a.extrema[i].r, b.extrema[i].r) < 1e-14);
    CHECK(rel(a.extrema[i].u, b.extrema[i].u) < 1e-14);
  }
  REQUIRE(a.grid.size() == b.grid.size());
  double worst = 0;
  for (Eigen::Index i = 0; i < a.grid.size(); ++i) {
    worst = std::max({worst, rel(a.grid.log_r(i), b.grid.log_r(i)), rel(a.u(i), b.u(i)),
                      rel(a.du(i), b.du(i))});
  }
  CHECK(worst < 1e-14);
}

} // namespace

TEST_CASE("number formatting keeps 17 significant digits") {
  oracle::Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double x = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.next() % 600) - 300);
    CHECK(std::strtod(io::fmt(x).c_str(), nullptr) == x);
  }
  CHECK(io::fmt(std::nan("")) == "nan");
  CHECK(io::fmt(-INFINITY) == "-inf");
  CHECK(io::fmt(0.1) == "0.10000000000000001");
}

TEST_CASE("json dump is ordered and stable") {
  io::json j;
  j["zeta"] = 1.0 / 3.0;
  j["alpha"] = {1, 2, 3};
  j["mid"] = std::nan("");
  const std::string a = io::dump_json(j);
  CHECK(a.find("\"alpha\"") < a.find("\"mid\""));
  CHECK(a.find("\"mid\": null") != std::string::npos);
  CHECK(a.find("0.33333333333333331") != std::string::npos);
  CHECK(io::dump_json(io::json::parse(a)) == a);
}

TEST_CASE("cache round trip reproduces the solution") {
  for (int K : {1, 2, 3}) {
    const StationarySolution sol = build_stationary(50, K);
    const StationarySolution back = io::parse_stationary(io::serialize_stationary(sol));
    check_same(sol, back);
    CHECK(io::serialize_stationary(back) == io::serialize_stationary(sol));
  }
}

TEST_CASE("corrupted cache files are detected and rebuilt") {
  const fs::path dir = scratch("corrupt");
  BuildOptions build;
  build.nodes = 1000;
  const auto first = io::cached_stationary(30, 2, build, dir);
  CHECK_FALSE(first.hit);
  const auto second = io::cached_stationary(30, 2, build, dir);
  CHECK(second.hit);
  check_same(first.solution, second.solution);

  std::string text = io::read_text(first.path);
  const auto pos = text.find('\n', text.find('\n') + 1) + 3;
  text[pos] = text[pos] == '1' ? '2' : '1';
  {
    std::ofstream out(first.path, std::ios::binary | std::ios::trunc);
    out << text;
  }
  CHECK_THROWS_AS(io::load_stationary(first.path), NumericalError);
  const auto third = io::cached_stationary(30, 2, build, dir);
  CHECK_FALSE(third.hit);
  CHECK(third.rebuilt_after_corruption);
  check_same(first.solution, third.solution);
  CHECK(io::read_text(third.path) == io::serialize_stationary(first.solution));

  {
    std::ofstream out(first.path, std::ios::binary | std::ios::trunc);
    out << "garbage";
  }
  CHECK(io::cached_stationary(30, 2, build, dir).rebuilt_after_corruption);
}

TEST_CASE("cache directory precedence") {
  ::setenv("NODAL_CACHE_DIR", "/tmp/from_env", 1);
  CHECK(io::cache_dir("explicit") == fs::path("explicit"));
  CHECK(io::cache_dir("") == fs::path("/tmp/from_env"));
  ::unsetenv("NODAL_CACHE_DIR");
  CHECK(io::cache_dir("") == fs::path(".nodal_cache"));
}

TEST_CASE("tables write csv and gnuplot mirrors") {
  const fs::path dir = scratch("tables");
  io::Table t;
  t.columns = {"x", "y"};
  t.add({"1", "2.5"});
  t.add({"3", "-4"});
  io::write_table(dir / "t.csv", t);
  CHECK(io::read_text(dir / "t.csv") == "x,y\n1,2.5\n3,-4\n");
  const std::string dat = io::read_text(dir / "t.dat");
  CHECK(dat.find("# x y") != std::string::npos);
  CHECK(dat.find("1 2.5\n3 -4\n") != std::string::npos);
}
