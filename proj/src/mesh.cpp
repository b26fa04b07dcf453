#include "meshforge/mesh.hpp"

#include <string>

#include "meshforge/errors.hpp"

namespace meshforge {

MeshParams MeshParams::bar(const ColumnedTopology& t) {
  MeshParams p;
  p.theta = Eigen::MatrixXd::Constant(t.slots(), t.depth(), kPi);
  p.phi = Eigen::MatrixXd::Constant(t.slots(), t.depth(), kPi);
  p.gamma = Eigen::VectorXd::Zero(t.n);
  return p;
}

void MeshParams::materialize_synthetic(const ColumnedTopology& t) {
  for (int l = 0; l < t.depth(); ++l) {
    for (int m = t.columns[l].active; m < t.slots(); ++m) {
      theta(m, l) = kPi;
      phi(m, l) = kPi;
    }
  }
}

void MeshParams::check(const ColumnedTopology& t) const {
  if (theta.rows() != t.slots() || theta.cols() != t.depth() || phi.rows() != t.slots() ||
      phi.cols() != t.depth() || gamma.size() != t.n) {
    throw DimensionError("mesh parameters are " + std::to_string(theta.rows()) + "x" +
                         std::to_string(theta.cols()) + " / gamma " +
                         std::to_string(gamma.size()) + ", topology needs " +
                         std::to_string(t.slots()) + "x" + std::to_string(t.depth()) +
                         " / gamma " + std::to_string(t.n));
  }
}

namespace {

void check_vector(const ColumnedTopology& t, const ModeVector& v) {
  if (v.size() != t.n) {
    throw DimensionError("mode vector has " + std::to_string(v.size()) + " entries, mesh has " +
                         std::to_string(t.n) + " modes");
  }
}

void check_column(const ColumnedTopology& t, int column) {
  if (column < 0 || column >= t.depth()) {
    throw IndexError("column " + std::to_string(column) + " out of range [0, " +
                     std::to_string(t.depth()) + ")");
  }
}

}  // namespace

void apply_column(const ColumnedTopology& t, const MeshParams& params, int column, ModeVector& v,
                  const NodeVariant& variant) {
  check_column(t, column);
  const Permutation& perm = t.columns[column].perm;
  ModeVector routed(t.n);
  for (int i = 0; i < t.n; ++i) routed[i] = v[perm[i]];
  for (int m = 0; m < t.slots(); ++m) {
    const Matrix2c node = node_matrix(params.theta(m, column), params.phi(m, column), variant);
    routed.segment<2>(2 * m) = node * routed.segment<2>(2 * m);
  }
  v = std::move(routed);
}

void apply_column_adjoint(const ColumnedTopology& t, const MeshParams& params, int column,
                          ModeVector& v, const NodeVariant& variant) {
  check_column(t, column);
  for (int m = 0; m < t.slots(); ++m) {
    const Matrix2c node = node_matrix(params.theta(m, column), params.phi(m, column), variant);
    v.segment<2>(2 * m) = node.adjoint() * v.segment<2>(2 * m);
  }
  const Permutation& perm = t.columns[column].perm;
  ModeVector back(t.n);
  for (int i = 0; i < t.n; ++i) back[perm[i]] = v[i];
  v = std::move(back);
}

void apply_output(const ColumnedTopology& t, const Eigen::VectorXd& gamma, ModeVector& v) {
  ModeVector out(t.n);
  for (int i = 0; i < t.n; ++i) out[i] = std::polar(1.0, gamma[i]) * v[t.final_perm[i]];
  v = std::move(out);
}

TransferMatrix column_matrix(const Permutation& perm, const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& phi, const NodeVariant& variant) {
  const int n = static_cast<int>(perm.size());
  if (!is_permutation(perm, n)) throw InvalidArgument("column permutation is not a bijection");
  if (theta.size() != n / 2 || phi.size() != n / 2) {
    throw DimensionError("column needs " + std::to_string(n / 2) + " node settings");
  }
  TransferMatrix nodes = TransferMatrix::Identity(n, n);
  for (int m = 0; m < n / 2; ++m) {
    nodes.block<2, 2>(2 * m, 2 * m) = node_matrix(theta[m], phi[m], variant);
  }
  TransferMatrix p = TransferMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) p(i, perm[i]) = 1.0;
  return nodes * p;
}

TransferMatrix mesh_matrix(const ColumnedTopology& t, const MeshParams& params,
                           const NodeVariant& variant) {
  params.check(t);
  TransferMatrix u(t.n, t.n);
  for (int j = 0; j < t.n; ++j) {
    ModeVector e = ModeVector::Unit(t.n, j);
    for (int l = 0; l < t.depth(); ++l) apply_column(t, params, l, e, variant);
    apply_output(t, params.gamma, e);
    u.col(j) = e;
  }
  return u;
}

ModeVector propagate(const ColumnedTopology& t, const MeshParams& params, const ModeVector& v_in,
                     int up_to_column, const NodeVariant& variant, bool with_output) {
  params.check(t);
  check_vector(t, v_in);
  if (up_to_column < 0 || up_to_column > t.depth()) {
    throw IndexError("cannot propagate through " + std::to_string(up_to_column) + " of " +
                     std::to_string(t.depth()) + " columns");
  }
  ModeVector v = v_in;
  for (int l = 0; l < up_to_column; ++l) apply_column(t, params, l, v, variant);
  if (with_output && up_to_column == t.depth()) apply_output(t, params.gamma, v);
  return v;
}

}  // namespace meshforge
