#ifndef NODAL_DOPRI5_HPP
#define NODAL_DOPRI5_HPP

#include "nodal/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace nodal {

/// Dormand-Prince 5(4) with the Hairer continuous extension.
/// State is a fixed-size Eigen column vector.
template <typename Scalar, int N>
class DormandPrince {
public:
  using State = Eigen::Matrix<Scalar, N, 1>;
  using Rhs = std::function<State(Scalar, const State &)>;

  struct Step {
    Scalar t0 = 0;
    Scalar h = 0;
    State y0;
    State y1;
    // continuous extension coefficients
    State c1, c2, c3, c4, c5;

    Scalar t1() const { return t0 + h; }
    State dense(Scalar t) const {
      const Scalar th = (t - t0) / h;
      const Scalar th1 = Scalar(1) - th;
      return c1 + th * (c2 + th1 * (c3 + th * (c4 + th1 * c5)));
    }
  };

  DormandPrince(Rhs rhs, Scalar rtol, Scalar atol)
      : rhs_(std::move(rhs)), rtol_(rtol), atol_(atol) {}

  void set_min_step(Scalar h) { h_min_ = h; }
  void set_max_step(Scalar h) { h_max_ = h; }

  /// One untimed step of length h; returns the 5th-order solution.
  State single_step(Scalar t, const State &y, Scalar h) const {
    Stages k;
    return stages(t, y, h, k);
  }

  /// Advances from (t, y) with trial step h, shrinking on rejection.
  /// On return h holds the proposed next step.
  Step advance(Scalar t, const State &y, Scalar &h) const {
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    for (;;) {
      if (abs(h) < h_min_) {
        throw NumericalError(ErrorKind::StepFailure,
                             "adaptive step size underflow");
      }
      Stages k;
      const State y1 = stages(t, y, h, k);
      State err = h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] +
                       e6 * k[5] + e7 * k[6]);
      Scalar norm = 0;
      for (int i = 0; i < N; ++i) {
        const Scalar sc = atol_ + rtol_ * max(abs(y(i)), abs(y1(i)));
        norm += (err(i) / sc) * (err(i) / sc);
      }
      norm = std::sqrt(norm / N);
      if (!std::isfinite(static_cast<double>(norm))) {
        h *= Scalar(0.2);
        continue;
      }
      if (norm <= 1) {
        Step s;
        s.t0 = t;
        s.h = h;
        s.y0 = y;
        s.y1 = y1;
        s.c1 = y;
        s.c2 = y1 - y;
        s.c3 = h * k[0] - s.c2;
        s.c4 = s.c2 - h * k[6] - s.c3;
        s.c5 = h * (d1 * k[0] + d3 * k[2] + d4 * k[3] + d5 * k[4] +
                    d6 * k[5] + d7 * k[6]);
        const Scalar fac =
            norm > 0 ? min(Scalar(5), max(Scalar(0.2),
                                          Scalar(0.9) * pow(norm, Scalar(-0.2))))
                     : Scalar(5);
        h = min(h * fac, h_max_);
        return s;
      }
      h *= max(Scalar(0.2), Scalar(0.9) * pow(norm, Scalar(-0.2)));
    }
  }

private:
  using Stages = std::array<State, 7>;

  State stages(Scalar t, const State &y, Scalar h, Stages &k) const {
    k[0] = rhs_(t, y);
    k[1] = rhs_(t + c2 * h, y + h * (a21 * k[0]));
    k[2] = rhs_(t + c3 * h, y + h * (a31 * k[0] + a32 * k[1]));
    k[3] = rhs_(t + c4 * h, y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]));
    k[4] = rhs_(t + c5 * h, y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] +
                                     a54 * k[3]));
    k[5] = rhs_(t + h, y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] +
                                a64 * k[3] + a65 * k[4]));
    const State y1 = y + h * (a71 * k[0] + a73 * k[2] + a74 * k[3] +
                              a75 * k[4] + a76 * k[5]);
    k[6] = rhs_(t + h, y1);
    return y1;
  }

  Rhs rhs_;
  Scalar rtol_;
  Scalar atol_;
  Scalar h_min_ = Scalar(1e-14);
  Scalar h_max_ = Scalar(1e300);

  static constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10,
                          c4 = Scalar(4) / 5, c5 = Scalar(8) / 9;
  static constexpr Scalar a21 = Scalar(1) / 5;
  static constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  static constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15,
                          a43 = Scalar(32) / 9;
  static constexpr Scalar a51 = Scalar(19372) / 6561,
                          a52 = Scalar(-25360) / 2187,
                          a53 = Scalar(64448) / 6561, a54 = Scalar(-212) / 729;
  static constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33,
                          a63 = Scalar(46732) / 5247, a64 = Scalar(49) / 176,
                          a65 = Scalar(-5103) / 18656;
  static constexpr Scalar a71 = Scalar(35) / 384, a73 = Scalar(500) / 1113,
                          a74 = Scalar(125) / 192, a75 = Scalar(-2187) / 6784,
                          a76 = Scalar(11) / 84;
  static constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695,
                          e4 = Scalar(71) / 1920, e5 = Scalar(-17253) / 339200,
                          e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
  static constexpr Scalar d1 = Scalar(-12715105075.0L) / 11282082432.0L,
                          d3 = Scalar(87487479700.0L) / 32700410799.0L,
                          d4 = Scalar(-10690763975.0L) / 1880347072.0L,
                          d5 = Scalar(701980252875.0L) / 199316789632.0L,
                          d6 = Scalar(-1453857185.0L) / 822651844.0L,
                          d7 = Scalar(69997945.0L) / 29380423.0L;
};

} // namespace nodal

#endif // NODAL_DOPRI5_HPP
