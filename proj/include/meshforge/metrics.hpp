#pragma once

#include <cstdint>

#include "meshforge/mesh.hpp"

namespace meshforge {

/// |tr(U^dag U_hat)| / N.
double fidelity(const TransferMatrix& u, const TransferMatrix& u_hat);

/// Row phases chi minimizing ||diag(e^{i chi}) U_hat - U||_F. Rows of U_hat
/// with no overlap with U get chi = 0.
Eigen::VectorXd row_alignment_phases(const TransferMatrix& u, const TransferMatrix& u_hat);

/// min over diagonal unitary D of ||D U_hat - U||_F.
double phase_aligned_distance(const TransferMatrix& u, const TransferMatrix& u_hat);

/// Fidelity after the optimal output phase reference has been applied.
double phase_aligned_fidelity(const TransferMatrix& u, const TransferMatrix& u_hat);

/// Haar-distributed unitary: QR of a seeded complex Gaussian matrix with the
/// phases of R's diagonal folded back into Q.
TransferMatrix haar_unitary(int n, std::uint64_t seed);

/// theta ~ U[0, pi], phi, gamma ~ U[0, 2pi) on active slots; synthetic slots bar.
MeshParams random_phase_params(const ColumnedTopology& t, std::uint64_t seed);

/// Every active node in cross state (theta = 0, phi = 0), gamma = 0.
MeshParams cross_params(const ColumnedTopology& t);

}  // namespace meshforge
