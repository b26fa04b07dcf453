#pragma once

#include "meshforge/linalg.hpp"
#include "meshforge/node.hpp"
#include "meshforge/topology.hpp"

namespace meshforge {

/// Ideal phase settings of a mesh. theta/phi are M x L (M = floor(N/2) slots
/// per column); slots at or beyond a column's active count hold the synthetic
/// bar setting theta = phi = pi. gamma holds the N output phases.
struct MeshParams {
  Eigen::MatrixXd theta;
  Eigen::MatrixXd phi;
  Eigen::VectorXd gamma;

  /// All-bar parameters shaped for `t`, gamma = 0.
  static MeshParams bar(const ColumnedTopology& t);

  /// Resets synthetic slots to (pi, pi).
  void materialize_synthetic(const ColumnedTopology& t);

  /// Throws DimensionError if the shapes disagree with `t`.
  void check(const ColumnedTopology& t) const;
};

/// Applies U^{(l)} = T(theta_l, phi_l) P^{(l)} to v in place.
void apply_column(const ColumnedTopology& t, const MeshParams& params, int column,
                  ModeVector& v, const NodeVariant& variant = {});

/// Applies (U^{(l)})^dag to v in place.
void apply_column_adjoint(const ColumnedTopology& t, const MeshParams& params, int column,
                          ModeVector& v, const NodeVariant& variant = {});

/// Applies D_N = Gamma(gamma) P_N in place.
void apply_output(const ColumnedTopology& t, const Eigen::VectorXd& gamma, ModeVector& v);

/// Dense matrix of one column.
TransferMatrix column_matrix(const Permutation& perm, const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& phi, const NodeVariant& variant = {});

/// Full operator D_N * U^{(L)} ... U^{(1)}.
TransferMatrix mesh_matrix(const ColumnedTopology& t, const MeshParams& params,
                           const NodeVariant& variant = {});

/// Field after the first `up_to_column` columns (0 returns v_in). The output
/// stage D_N is applied only when `with_output` is set and all L columns ran.
ModeVector propagate(const ColumnedTopology& t, const MeshParams& params, const ModeVector& v_in,
                     int up_to_column, const NodeVariant& variant = {}, bool with_output = false);

}  // namespace meshforge
