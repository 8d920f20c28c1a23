#include "nodal/radial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nodal {

RadialGrid::RadialGrid(Eigen::VectorXd log_r) : log_r_(std::move(log_r)) {
  const Eigen::Index n = log_r_.size();
  if (n < 2) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "radial grid needs at least two nodes");
  }
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (!(log_r_(i + 1) > log_r_(i))) {
      throw NumericalError(ErrorKind::InvalidArgument,
                           "radial grid nodes must be strictly increasing");
    }
  }
  mass_.resize(n);
  log_mass_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    log_mass_(i) = log_fitted_mass(i, 0.0L);
    mass_(i) = std::exp(log_mass_(i));
  }
}

namespace {

// log of int_0^h (1 - t/h) e^{c t} dt = h (e^x - 1 - x) / x^2, x = c h
Wide log_hat_integral(Wide c, Wide h) {
  const Wide x = c * h;
  if (std::abs(x) < 1e-4L) {
    return std::log(h) + std::log(0.5L + x / 6 + x * x / 24);
  }
  if (x > 40) {
    return std::log(h) + x + std::log1p(-(1 + x) * std::exp(-x)) -
           2 * std::log(x);
  }
  return std::log(h) + std::log(std::expm1(x) - x) - 2 * std::log(std::abs(x));
}

Wide log_add(Wide a, Wide b) {
  if (a < b) {
    std::swap(a, b);
  }
  return a + std::log1p(std::exp(b - a));
}

} // namespace

Wide RadialGrid::log_fitted_mass(Eigen::Index i, Wide slope) const {
  const Eigen::Index n = size();
  const Wide s = log_r_(i);
  const Wide c = 2 + slope;
  Wide acc = -std::numeric_limits<Wide>::infinity();
  if (i == 0) {
    // the origin node is constant on the disk below s_0
    acc = -std::log(2.0L);
  } else {
    acc = log_hat_integral(-c, s - static_cast<Wide>(log_r_(i - 1)));
  }
  if (i + 1 < n) {
    acc = log_add(acc, log_hat_integral(c, static_cast<Wide>(log_r_(i + 1)) - s));
  }
  return 2 * s + acc;
}

VectorXw RadialGrid::log_fitted_masses(const VectorXw &slopes) const {
  VectorXw out(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    out(i) = log_fitted_mass(i, slopes(i));
  }
  return out;
}

double RadialGrid::r(Eigen::Index i) const {
  return i == 0 ? 0.0 : std::exp(log_r_(i));
}

Eigen::VectorXd RadialGrid::radii() const {
  Eigen::VectorXd out(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    out(i) = r(i);
  }
  return out;
}

RadialGrid RadialGrid::shifted(double delta) const {
  return RadialGrid((log_r_.array() + delta).matrix());
}

Eigen::VectorXd equidistribute(double s_begin, double s_end, Eigen::Index n,
                               const Eigen::VectorXd &aux,
                               const Eigen::VectorXd &density) {
  if (n < 2 || !(s_end > s_begin)) {
    throw NumericalError(ErrorKind::InvalidArgument,
                         "equidistribute needs n >= 2 and a nonempty range");
  }
  const Eigen::Index m = aux.size();
  Eigen::VectorXd cumulative(m);
  cumulative(0) = 0.0;
  for (Eigen::Index j = 1; j < m; ++j) {
    cumulative(j) = cumulative(j - 1) +
                    0.5 * (density(j) + density(j - 1)) * (aux(j) - aux(j - 1));
  }
  const double total = cumulative(m - 1);
  Eigen::VectorXd nodes(n);
  nodes(0) = s_begin;
  nodes(n - 1) = s_end;
  Eigen::Index j = 1;
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    const double target = total * static_cast<double>(k) / (n - 1);
    while (j < m - 1 && cumulative(j) < target) {
      ++j;
    }
    const double c0 = cumulative(j - 1);
    const double c1 = cumulative(j);
    const double t = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
    nodes(k) = aux(j - 1) + t * (aux(j) - aux(j - 1));
  }
  // guard against coincident nodes from flat stretches of the cumulative
  for (Eigen::Index k = 1; k < n; ++k) {
    if (!(nodes(k) > nodes(k - 1))) {
      nodes(k) = std::nextafter(nodes(k - 1), s_end + 1.0);
    }
  }
  return nodes;
}

Eigen::VectorXd equidistribute(double s_begin, double s_end, Eigen::Index n,
                               const std::function<double(double)> &density,
                               Eigen::Index aux_points) {
  const Eigen::VectorXd aux =
      Eigen::VectorXd::LinSpaced(aux_points, s_begin, s_end);
  Eigen::VectorXd d(aux_points);
  for (Eigen::Index j = 0; j < aux_points; ++j) {
    d(j) = density(aux(j));
  }
  return equidistribute(s_begin, s_end, n, aux, d);
}

} // namespace nodal
