#include "meshforge/cascade.hpp"

#include <optional>

namespace meshforge {

InterstitialElement InterstitialElement::scalar(int n, Complex g, bool linearizable) {
  return {Eigen::VectorXcd::Constant(n, g), linearizable};
}

void Cascade::validate() const {
  if (meshes.empty()) throw InvalidArgument("cascade has no meshes");
  if (interstitials.size() + 1 != meshes.size()) {
    throw DimensionError("cascade of " + std::to_string(meshes.size()) + " meshes needs " +
                         std::to_string(meshes.size() - 1) + " interstitial elements");
  }
  const int n = meshes.front().topology().n;
  for (const auto& m : meshes) {
    if (m.topology().n != n) throw DimensionError("cascaded meshes differ in size");
  }
  for (const auto& e : interstitials) {
    if (e.gain.size() != n) throw DimensionError("interstitial gain length differs from mesh size");
  }
}

ModeVector Cascade::propagate_prefix(const ModeVector& input, int k) const {
  ModeVector v = input;
  for (int j = 0; j < k; ++j) {
    v = meshes[j].matrix() * v;
    v = interstitials[j].gain.cwiseProduct(v);
  }
  return v;
}

TransferMatrix Cascade::matrix() const {
  validate();
  TransferMatrix u = meshes.front().matrix();
  for (size_t k = 1; k < meshes.size(); ++k) {
    u = meshes[k].matrix() * interstitials[k - 1].gain.asDiagonal() * u;
  }
  return u;
}

TransferMatrix cascade_target(const Cascade& cascade, const std::vector<MeshParams>& targets) {
  cascade.validate();
  if (targets.size() != cascade.meshes.size()) {
    throw DimensionError("one target per mesh is required");
  }
  TransferMatrix u;
  for (size_t k = 0; k < targets.size(); ++k) {
    const PhysicalMesh& m = cascade.meshes[k];
    const TransferMatrix uk = mesh_matrix(m.topology(), targets[k], m.variant());
    u = k == 0 ? uk : TransferMatrix(uk * cascade.interstitials[k - 1].gain.asDiagonal() * u);
  }
  return u;
}

std::vector<ProgramReport> program_cascade(Cascade& cascade, const std::vector<MeshParams>& targets,
                                           const NullifyOptions& options) {
  cascade.validate();
  if (targets.size() != cascade.meshes.size()) {
    throw DimensionError("one target per mesh is required");
  }
  for (size_t k = 0; k < cascade.interstitials.size(); ++k) {
    if (!cascade.interstitials[k].linearizable) {
      throw NonLinearizableError("interstitial element " + std::to_string(k) +
                                 " cannot be set to its linear regime");
    }
  }
  const int n = cascade.meshes.front().topology().n;
  std::vector<Eigen::VectorXcd> saved;
  for (auto& e : cascade.interstitials) {
    saved.push_back(e.gain);
    e.gain = Eigen::VectorXcd::Ones(n);
  }

  std::vector<ProgramReport> reports;
  std::optional<NonNullifiableError> failure;
  // model of the programmed prefix with linear interstitials
  TransferMatrix prefix = TransferMatrix::Identity(n, n);
  try {
    for (size_t k = 0; k < cascade.meshes.size(); ++k) {
      PhysicalMesh& mesh = cascade.meshes[k];
      const TransferMatrix uk = mesh_matrix(mesh.topology(), targets[k], mesh.variant());
      NullificationSet nset = nullification_set(mesh.topology(), targets[k], mesh.variant());
      for (auto& w : nset.vectors) w = prefix.adjoint() * w;
      const int kk = static_cast<int>(k);
      const InputStage stage = [&cascade, kk](const ModeVector& x) {
        return cascade.propagate_prefix(x, kk);
      };
      try {
        reports.push_back(program_mesh(mesh, targets[k], nset, options, stage));
      } catch (const NonNullifiableError& e) {
        reports.push_back(e.report());
        if (!failure) failure.emplace(e);
      }
      align_output_phases(mesh, uk);
      prefix = uk * prefix;
    }
  } catch (...) {
    for (size_t k = 0; k < saved.size(); ++k) cascade.interstitials[k].gain = saved[k];
    throw;
  }
  for (size_t k = 0; k < saved.size(); ++k) cascade.interstitials[k].gain = saved[k];
  if (failure) throw *failure;
  return reports;
}

}  // namespace meshforge
