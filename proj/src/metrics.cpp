#include "meshforge/metrics.hpp"

#include <cmath>
#include <random>

#include "meshforge/errors.hpp"

namespace meshforge {

namespace {

void check_same_shape(const TransferMatrix& u, const TransferMatrix& u_hat) {
  if (u.rows() != u_hat.rows() || u.cols() != u_hat.cols()) {
    throw DimensionError("matrices differ in shape");
  }
}

}  // namespace

double fidelity(const TransferMatrix& u, const TransferMatrix& u_hat) {
  check_same_shape(u, u_hat);
  return std::abs((u.adjoint() * u_hat).trace()) / static_cast<double>(u.rows());
}

Eigen::VectorXd row_alignment_phases(const TransferMatrix& u, const TransferMatrix& u_hat) {
  check_same_shape(u, u_hat);
  Eigen::VectorXd chi(u.rows());
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    // maximize Re(e^{i chi} <u_r, u_hat_r>)
    const Complex overlap = u_hat.row(r).dot(u.row(r));
    chi[r] = std::abs(overlap) > 0.0 ? std::arg(overlap) : 0.0;
  }
  return chi;
}

double phase_aligned_distance(const TransferMatrix& u, const TransferMatrix& u_hat) {
  const Eigen::VectorXd chi = row_alignment_phases(u, u_hat);
  TransferMatrix aligned = u_hat;
  for (Eigen::Index r = 0; r < u.rows(); ++r) aligned.row(r) *= std::polar(1.0, chi[r]);
  return (aligned - u).norm();
}

double phase_aligned_fidelity(const TransferMatrix& u, const TransferMatrix& u_hat) {
  const Eigen::VectorXd chi = row_alignment_phases(u, u_hat);
  TransferMatrix aligned = u_hat;
  for (Eigen::Index r = 0; r < u.rows(); ++r) aligned.row(r) *= std::polar(1.0, chi[r]);
  return fidelity(u, aligned);
}

TransferMatrix haar_unitary(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("unitary dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  TransferMatrix a(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) a(i, j) = Complex(gauss(rng), gauss(rng));
  }
  Eigen::HouseholderQR<TransferMatrix> qr(a);
  TransferMatrix q = qr.householderQ();
  const TransferMatrix& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

MeshParams random_phase_params(const ColumnedTopology& t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> split(0.0, kPi);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  MeshParams p = MeshParams::bar(t);
  for (int l = 0; l < t.depth(); ++l) {
    for (int m = 0; m < t.columns[l].active; ++m) {
      p.theta(m, l) = split(rng);
      p.phi(m, l) = phase(rng);
    }
  }
  for (int i = 0; i < t.n; ++i) p.gamma[i] = phase(rng);
  return p;
}

MeshParams cross_params(const ColumnedTopology& t) {
  MeshParams p = MeshParams::bar(t);
  for (int l = 0; l < t.depth(); ++l) {
    for (int m = 0; m < t.columns[l].active; ++m) {
      p.theta(m, l) = 0.0;
      p.phi(m, l) = 0.0;
    }
  }
  return p;
}

}  // namespace meshforge
