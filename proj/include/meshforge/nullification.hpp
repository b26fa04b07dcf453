#pragma once

#include <vector>

#include "meshforge/mesh.hpp"

namespace meshforge {

/// o_N = (1, 0, 1, 0, ...): unit power in the top output of every node slot,
/// trailing zero for odd N.
ModeVector target_vector(int n);

/// Input vector w_l that, sent through correctly set columns 0..l, leaves
/// every node of column l with zero power in its bottom port:
/// w_l = (U^{(0)})^dag ... (U^{(l)})^dag o_N.
ModeVector nullification_vector(const ColumnedTopology& t, const MeshParams& params, int column,
                                const NodeVariant& variant = {});

struct NullificationSet {
  std::vector<ModeVector> vectors;
  ModeVector target_pattern;

  int size() const { return static_cast<int>(vectors.size()); }
};

NullificationSet nullification_set(const ColumnedTopology& t, const MeshParams& params,
                                   const NodeVariant& variant = {});

/// Closed-form two-step nullification of a standard node fed (u1, u2).
struct NodeSolution {
  double alpha = 0.0;
  double beta = 0.0;
  // beta was left at the 0 convention because one input is zero
  bool phase_indeterminate = false;
};

/// alpha = 2 atan|u1/u2|, beta = -arg(u1/u2) wrapped to [0, 2pi). Throws
/// DegenerateInputError when both inputs vanish.
NodeSolution nullify_node_closed_form(Complex u1, Complex u2);

/// Bottom-port power |x2|^2 of a standard node with settings (alpha, beta).
double bottom_power(double alpha, double beta, Complex u1, Complex u2);

}  // namespace meshforge
