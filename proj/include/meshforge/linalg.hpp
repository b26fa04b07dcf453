#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <vector>

namespace meshforge {

using Complex = std::complex<double>;

/// Length-N vector of complex mode amplitudes.
using ModeVector = Eigen::VectorXcd;

/// Dense N x N complex transmission matrix.
using TransferMatrix = Eigen::MatrixXcd;

using Matrix2c = Eigen::Matrix2cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Total power sum_n |v_n|^2.
inline double power(const ModeVector& v) { return v.squaredNorm(); }

/// Wraps an angle into [0, 2pi).
double wrap_phase(double x);

/// Wraps an angle into [lo, lo + 2pi).
double wrap_phase_from(double x, double lo);

/// Signed difference a - b folded into (-pi, pi].
double phase_difference(double a, double b);

/// ||U^dag U - I||_F
double unitarity_deviation(const TransferMatrix& u);

}  // namespace meshforge
