#include "meshforge/node.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meshforge/errors.hpp"

namespace meshforge {

NodePhases::NodePhases(double theta, double phi) : theta_(theta), phi_(wrap_phase(phi)) {
  if (!(theta >= 0.0 && theta <= kPi)) {
    throw InvalidArgument("theta must lie in [0, pi], got " + std::to_string(theta));
  }
  if (!std::isfinite(phi)) throw InvalidArgument("phi must be finite");
}

std::pair<double, double> NodeVariant::theta_range() const {
  if (kind != Kind::kTunableCoupler) return {0.0, kPi};
  // theta = pi - 2 kL, clipped to the physical [0, pi] interval
  const double lo = std::clamp(kPi - 2.0 * coupling_max, 0.0, kPi);
  const double hi = std::clamp(kPi - 2.0 * coupling_min, 0.0, kPi);
  return {lo, hi};
}

const char* to_string(NodeVariant::Kind kind) {
  switch (kind) {
    case NodeVariant::Kind::kStandard:
      return "standard";
    case NodeVariant::Kind::kDifferential:
      return "differential";
    case NodeVariant::Kind::kTunableCoupler:
      return "tdc";
  }
  return "?";
}

NodeVariant::Kind variant_kind_from_string(const std::string& name) {
  if (name == "standard") return NodeVariant::Kind::kStandard;
  if (name == "differential") return NodeVariant::Kind::kDifferential;
  if (name == "tdc") return NodeVariant::Kind::kTunableCoupler;
  throw InvalidArgument("unknown node variant '" + name + "'");
}

Matrix2c node_matrix(const NodePhases& phases, const NodeVariant& variant) {
  return node_matrix(phases.theta(), phases.phi(), variant);
}

Matrix2c node_matrix(double theta, double phi, const NodeVariant& variant) {
  const double s = std::sin(0.5 * theta);
  const double c = std::cos(0.5 * theta);
  const Complex ephi = std::polar(1.0, phi);
  Matrix2c t;
  switch (variant.kind) {
    case NodeVariant::Kind::kStandard:
      t << kI * ephi * s, kI * c, kI * ephi * c, -kI * s;
      return t;
    case NodeVariant::Kind::kDifferential: {
      // each arm shifter only reaches pi; the bottom arm covers [pi, 2pi)
      const double wrapped = wrap_phase(phi);
      const double top = wrapped < kPi ? wrapped : 0.0;
      const double bottom = wrapped < kPi ? 0.0 : kTwoPi - wrapped;
      const Complex et = std::polar(1.0, top);
      const Complex eb = std::polar(1.0, bottom);
      t << kI * et * s, kI * eb * c, kI * et * c, -kI * eb * s;
      return t;
    }
    case NodeVariant::Kind::kTunableCoupler: {
      // cos(kL) = sin(theta/2), sin(kL) = cos(theta/2)
      t << ephi * s, kI * c, kI * ephi * c, s;
      return t;
    }
  }
  return t;
}

Eigen::Vector2cd variant_input_phases(const NodeVariant& variant) {
  if (variant.kind == NodeVariant::Kind::kTunableCoupler) return {1.0, kI};
  return {1.0, 1.0};
}

TransferMatrix embed_node(const Matrix2c& t2, int m, int n_dim) {
  if (m < 0 || 2 * m + 2 > n_dim) {
    throw IndexError("node slot " + std::to_string(m) + " does not fit in " +
                     std::to_string(n_dim) + " modes");
  }
  TransferMatrix out = TransferMatrix::Identity(n_dim, n_dim);
  out.block<2, 2>(2 * m, 2 * m) = t2;
  return out;
}

}  // namespace meshforge
