#include "meshforge/decompose.hpp"

#include <cmath>
#include <optional>

#include "meshforge/errors.hpp"

namespace meshforge {

namespace {

constexpr double kUnitarityTolerance = 1e-8;

// A node acting on physical waveguides (pair, pair + 1).
struct PairNode {
  int pair;
  double theta;
  double phi;
};

// Settings nulling x conj(T00) + y conj(T01), i.e. the left entry of the row
// vector (x, y) T^dag.
PairNode null_from_right(int pair, Complex x, Complex y) {
  const double ax = std::abs(x);
  const double ay = std::abs(y);
  const double theta = 2.0 * std::atan2(ay, ax);
  const double phi = (ax == 0.0 || ay == 0.0) ? 0.0 : wrap_phase(std::arg(-x / y));
  return {pair, theta, phi};
}

// Settings nulling the bottom output of T (a, b)^T.
PairNode null_from_left(int pair, Complex a, Complex b) {
  const double aa = std::abs(a);
  const double ab = std::abs(b);
  const double theta = 2.0 * std::atan2(aa, ab);
  const double phi = (aa == 0.0 || ab == 0.0) ? 0.0 : wrap_phase(std::arg(b) - std::arg(a));
  return {pair, theta, phi};
}

}  // namespace

MeshParams decompose_rectangular(const TransferMatrix& target) {
  if (target.rows() != target.cols()) throw DimensionError("target matrix must be square");
  const int n = static_cast<int>(target.rows());
  if (n < 2) throw InvalidArgument("decomposition needs N >= 2");
  const double deviation = unitarity_deviation(target);
  if (!(deviation <= kUnitarityTolerance)) throw NonUnitaryError(deviation);

  // Alternate column eliminations (inverse nodes from the right) and row
  // eliminations (nodes from the left) along anti-diagonals until only a
  // diagonal remains.
  TransferMatrix u = target;
  std::vector<PairNode> right;
  std::vector<PairNode> left;
  for (int i = 0; i < n - 1; ++i) {
    if (i % 2 == 0) {
      for (int j = 0; j <= i; ++j) {
        const int c = i - j;
        const int r = n - 1 - j;
        const PairNode node = null_from_right(c, u(r, c), u(r, c + 1));
        const Matrix2c t2 = node_matrix(node.theta, node.phi);
        u.middleCols(c, 2) = (u.middleCols(c, 2) * t2.adjoint()).eval();
        right.push_back(node);
      }
    } else {
      for (int j = 1; j <= i + 1; ++j) {
        const int r = n + j - i - 2;
        const int c = j - 1;
        const PairNode node = null_from_left(r - 1, u(r - 1, c), u(r, c));
        const Matrix2c t2 = node_matrix(node.theta, node.phi);
        u.middleRows(r - 1, 2) = (t2 * u.middleRows(r - 1, 2)).eval();
        left.push_back(node);
      }
    }
  }

  // target = B_1^-1 ... B_s^-1 D A_r ... A_1. Push D through the inverse left
  // nodes: T(theta, phi)^-1 diag(d1, d2) = diag(-e^{-i phi} d2, -d2)
  // T(theta, arg d1 - arg d2).
  Eigen::VectorXcd d = u.diagonal();
  std::vector<PairNode> order = right;
  for (auto it = left.rbegin(); it != left.rend(); ++it) {
    const int p = it->pair;
    const Complex d1 = d[p];
    const Complex d2 = d[p + 1];
    order.push_back({p, it->theta, wrap_phase(std::arg(d1) - std::arg(d2))});
    d[p] = -std::polar(1.0, -it->phi) * d2;
    d[p + 1] = -d2;
  }

  // As-soon-as-possible placement on the grid; column c couples pairs whose
  // top waveguide has the same parity as c.
  std::vector<std::vector<std::optional<PairNode>>> grid(n, std::vector<std::optional<PairNode>>(n));
  std::vector<int> last(n, -1);
  for (const PairNode& node : order) {
    int c = std::max(last[node.pair], last[node.pair + 1]) + 1;
    if (c % 2 != node.pair % 2) ++c;
    if (c >= n) throw Error("decomposition overflowed the rectangular grid");
    grid[c][node.pair] = node;
    last[node.pair] = last[node.pair + 1] = c;
  }

  // Map grid nodes to slots and fold the bar-node phases of the compiled
  // topology into phi and gamma. `delta` holds the phase of the compiled field
  // relative to the ideal grid field, in slot order.
  const ColumnedTopology topo = rectangular(n);
  MeshParams params = MeshParams::bar(topo);
  Eigen::VectorXcd delta = Eigen::VectorXcd::Ones(n);
  for (int c = 0; c < topo.depth(); ++c) {
    const Column& col = topo.columns[c];
    Eigen::VectorXcd routed(n);
    for (int i = 0; i < n; ++i) routed[i] = delta[col.perm[i]];
    for (int m = 0; m < topo.slots(); ++m) {
      const int pair = (c % 2 == 0) ? 2 * m : 2 * m + 1;
      const auto& node = (m < col.active && pair + 1 < n) ? grid[c][pair] : std::nullopt;
      if (node) {
        params.theta(m, c) = node->theta;
        params.phi(m, c) =
            wrap_phase(node->phi - std::arg(routed[2 * m]) + std::arg(routed[2 * m + 1]));
        routed[2 * m] = routed[2 * m + 1];
      } else {
        // bar node (theta = phi = pi) is -i on both modes
        routed[2 * m] *= -kI;
        routed[2 * m + 1] *= -kI;
      }
    }
    delta = routed;
  }
  for (int o = 0; o < n; ++o) {
    params.gamma[o] = wrap_phase(std::arg(d[o]) - std::arg(delta[topo.final_perm[o]]));
  }
  return params;
}

}  // namespace meshforge
