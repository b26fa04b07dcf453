#include "meshforge/nullification.hpp"

#include <cmath>
#include <string>

#include "meshforge/errors.hpp"

namespace meshforge {

ModeVector target_vector(int n) {
  if (n < 2) throw InvalidArgument("target vector needs N >= 2");
  ModeVector o = ModeVector::Zero(n);
  for (int m = 0; m < n / 2; ++m) o[2 * m] = 1.0;
  return o;
}

ModeVector nullification_vector(const ColumnedTopology& t, const MeshParams& params, int column,
                                const NodeVariant& variant) {
  params.check(t);
  if (column < 0 || column >= t.depth()) {
    throw IndexError("column " + std::to_string(column) + " out of range [0, " +
                     std::to_string(t.depth()) + ")");
  }
  ModeVector w = target_vector(t.n);
  for (int l = column; l >= 0; --l) apply_column_adjoint(t, params, l, w, variant);
  return w;
}

NullificationSet nullification_set(const ColumnedTopology& t, const MeshParams& params,
                                   const NodeVariant& variant) {
  NullificationSet set;
  set.target_pattern = target_vector(t.n);
  set.vectors.reserve(t.depth());
  for (int l = 0; l < t.depth(); ++l) set.vectors.push_back(nullification_vector(t, params, l, variant));
  return set;
}

NodeSolution nullify_node_closed_form(Complex u1, Complex u2) {
  const double a1 = std::abs(u1);
  const double a2 = std::abs(u2);
  if (a1 == 0.0 && a2 == 0.0) {
    throw DegenerateInputError("node receives no light; nullification is undefined");
  }
  NodeSolution s;
  // atan2 handles u2 = 0 (alpha = pi) without dividing
  s.alpha = 2.0 * std::atan2(a1, a2);
  if (a1 == 0.0 || a2 == 0.0) {
    s.beta = 0.0;
    s.phase_indeterminate = true;
  } else {
    s.beta = wrap_phase(std::arg(u2) - std::arg(u1));
  }
  return s;
}

double bottom_power(double alpha, double beta, Complex u1, Complex u2) {
  const Complex x2 = std::polar(std::cos(0.5 * alpha), beta) * u1 - std::sin(0.5 * alpha) * u2;
  return std::norm(x2);
}

}  // namespace meshforge
