#ifndef NODAL_COMMON_HPP
#define NODAL_COMMON_HPP

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

namespace nodal {

// Extended-range scalar. Quantities such as the first eigenvalue of the
// linearized operator scale like mu^-2 and leave the double range once the
// concentration scale drops below ~1e-154.
using Wide = long double;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VectorXw = Vector<Wide>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Wide kPiWide = 3.141592653589793238462643383279502884L;

enum class ErrorKind {
  MaxSpanExceeded,
  StepFailure,
  WindowExceedsDomain,
  EmptyRegion,
  EigenSolveDiverged,
  NonNegativeGroundState,
  EmptySweep,
  InvalidConfig,
  CacheCorrupt,
  StepUnderflowWithoutGrowth,
  InvalidArgument,
};

inline const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::MaxSpanExceeded: return "MaxSpanExceeded";
  case ErrorKind::StepFailure: return "StepFailure";
  case ErrorKind::WindowExceedsDomain: return "WindowExceedsDomain";
  case ErrorKind::EmptyRegion: return "EmptyRegion";
  case ErrorKind::EigenSolveDiverged: return "EigenSolveDiverged";
  case ErrorKind::NonNegativeGroundState: return "NonNegativeGroundState";
  case ErrorKind::EmptySweep: return "EmptySweep";
  case ErrorKind::InvalidConfig: return "InvalidConfig";
  case ErrorKind::CacheCorrupt: return "CacheCorrupt";
  case ErrorKind::StepUnderflowWithoutGrowth: return "StepUnderflowWithoutGrowth";
  case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class NumericalError : public std::runtime_error {
public:
  NumericalError(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

// |x|^e * sign(x) evaluated through logs so that large exponents neither
// overflow nor flush to zero prematurely. |x| < 1e-300 contributes 0.
template <typename Scalar>
Scalar signed_power(Scalar x, Scalar exponent) {
  using std::abs;
  using std::exp;
  using std::log;
  const Scalar a = abs(x);
  if (a < Scalar(1e-300)) {
    return Scalar(0);
  }
  const Scalar m = exp(exponent * log(a));
  return x < 0 ? -m : m;
}

// log|x|^e, -inf when x vanishes.
template <typename Scalar>
Scalar log_abs_power(Scalar x, Scalar exponent) {
  using std::abs;
  using std::log;
  const Scalar a = abs(x);
  if (a < Scalar(1e-300)) {
    return -std::numeric_limits<Scalar>::infinity();
  }
  return exponent * log(a);
}

} // namespace nodal

#endif // NODAL_COMMON_HPP
