#include "meshforge/linalg.hpp"

#include <cmath>

namespace meshforge {

double wrap_phase(double x) { return wrap_phase_from(x, 0.0); }

double wrap_phase_from(double x, double lo) {
  double y = std::fmod(x - lo, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  // fmod can round up to exactly 2pi for tiny negative inputs
  if (y >= kTwoPi) y = 0.0;
  return lo + y;
}

double phase_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -kPi) d += kTwoPi;
  return d;
}

double unitarity_deviation(const TransferMatrix& u) {
  const auto n = u.cols();
  return (u.adjoint() * u - TransferMatrix::Identity(n, n)).norm();
}

}  // namespace meshforge
