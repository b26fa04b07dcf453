#pragma once

#include "meshforge/linalg.hpp"

namespace meshforge {

/// Split setting theta in [0, pi] and differential phase phi in [0, 2pi).
class NodePhases {
 public:
  /// Throws InvalidArgument when theta lies outside [0, pi]; phi is wrapped.
  NodePhases(double theta, double phi);

  double theta() const { return theta_; }
  double phi() const { return phi_; }

 private:
  double theta_;
  double phi_;
};

/// Physical realization of a tunable beamsplitter node.
///
///  - kStandard: external phase shifter on the top input followed by an MZI
///    coupler; the matrix is exactly i [[e^{iφ} sin θ/2, cos θ/2],
///    [e^{iφ} cos θ/2, -sin θ/2]].
///  - kDifferential: two input phase shifters limited to [0, pi]; phi below pi
///    drives the top shifter, phi above pi drives the bottom one. Equals the
///    standard matrix times the bottom shifter phase e^{i b}.
///  - kTunableCoupler: tunable directional coupler with coupling product
///    kL = (pi - theta)/2, so that bar transmissivity cos^2(kL) equals
///    sin^2(theta/2). Equals -i diag(1,i) T_std diag(1,i).
struct NodeVariant {
  enum class Kind { kStandard, kDifferential, kTunableCoupler };

  Kind kind = Kind::kStandard;
  // Achievable coupling-length product range (tunable coupler only).
  double coupling_min = 0.0;
  double coupling_max = kPi;

  static NodeVariant standard() { return {}; }
  static NodeVariant differential() { return {Kind::kDifferential}; }
  static NodeVariant tunable_coupler(double kl_min = 0.0, double kl_max = kPi) {
    return {Kind::kTunableCoupler, kl_min, kl_max};
  }

  /// Interval of theta reachable by the coupler itself. Only the tunable
  /// coupler limits this; MZI range limits live in the hardware error model.
  std::pair<double, double> theta_range() const;
};

const char* to_string(NodeVariant::Kind kind);
NodeVariant::Kind variant_kind_from_string(const std::string& name);

/// 2x2 node transmission matrix for validated settings.
Matrix2c node_matrix(const NodePhases& phases, const NodeVariant& variant = {});

/// Same as above without range checks; used on hot propagation paths where
/// theta may legitimately sit slightly outside [0, pi] (voltage-driven nodes).
Matrix2c node_matrix(double theta, double phi, const NodeVariant& variant = {});

/// Setting-independent input phases d such that the variant's bottom output
/// vanishes exactly when the standard node's does for input diag(d) u.
Eigen::Vector2cd variant_input_phases(const NodeVariant& variant);

/// Embeds t2 at rows/columns (2m, 2m+1) of an N x N identity (0-based m).
TransferMatrix embed_node(const Matrix2c& t2, int m, int n_dim);

}  // namespace meshforge
