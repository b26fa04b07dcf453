#pragma once

#include <vector>

#include "meshforge/programming.hpp"

namespace meshforge {

/// Element-wise complex gain between two meshes (a stand-in for a tunable
/// nonlinearity). `linearizable` says whether it can be driven to gain 1.
struct InterstitialElement {
  Eigen::VectorXcd gain;
  bool linearizable = true;

  static InterstitialElement scalar(int n, Complex g, bool linearizable = true);
};

/// Meshes of equal size separated by interstitial elements
/// (interstitials.size() == meshes.size() - 1).
struct Cascade {
  std::vector<PhysicalMesh> meshes;
  std::vector<InterstitialElement> interstitials;

  void validate() const;
  /// Physical composite operator U_K G_{K-1} ... G_1 U_1.
  TransferMatrix matrix() const;
  /// Field after meshes 0..k-1 and the interstitials that follow them.
  ModeVector propagate_prefix(const ModeVector& input, int k) const;
};

/// Programs every mesh in sequence with device-level nullification vectors
/// (back-propagated through the already programmed meshes) while the
/// interstitials are held linear; each mesh's output phases are aligned to
/// its target before moving on. Gains are restored afterwards. Throws
/// NonLinearizableError before touching anything if an interstitial cannot
/// be linearized, and NonNullifiableError (first failing mesh) after all
/// meshes ran.
std::vector<ProgramReport> program_cascade(Cascade& cascade, const std::vector<MeshParams>& targets,
                                           const NullifyOptions& options = {});

/// Ideal composite of the targets with the cascade's current gains.
TransferMatrix cascade_target(const Cascade& cascade, const std::vector<MeshParams>& targets);

}  // namespace meshforge
