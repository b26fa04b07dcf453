#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace meshforge {

/// Index map for a permutation matrix P: (P v)[i] = v[perm[i]].
using Permutation = std::vector<int>;

bool is_permutation(const Permutation& perm, int n);
Permutation identity_permutation(int n);
Permutation inverse(const Permutation& perm);
/// Composition `second ∘ first`: applying the result equals applying
/// `first` then `second`.
Permutation compose(const Permutation& first, const Permutation& second);

/// One 2x2 coupling in a netlist. Link ids are arbitrary non-negative ints;
/// `in_top`/`out_top` are the node's first ports.
struct Coupling {
  int node_id = 0;
  int in_top = 0;
  int in_bottom = 0;
  int out_top = 0;
  int out_bottom = 0;
};

/// Arbitrary feedforward (or not) connection of 2x2 nodes. Links
/// 0..n_inputs-1 are the device inputs; `outputs[k]` is the link leaving the
/// device at output port k.
struct Netlist {
  int n_inputs = 0;
  std::vector<Coupling> couplings;
  std::vector<int> outputs;
};

/// A column of simultaneously-acting nodes: route by `perm`, then nodes act on
/// slot pairs (2m, 2m+1) for m < active. Pairs m >= active are synthetic bar
/// nodes.
struct Column {
  Permutation perm;
  int active = 0;
};

/// Compiled, minimal-depth form of a feedforward mesh.
struct ColumnedTopology {
  int n = 0;
  std::vector<Column> columns;
  Permutation final_perm;
  /// node_labels[l][m] is the original node id at slot m of column l.
  std::vector<std::vector<int>> node_labels;
  std::string architecture = "netlist";

  int depth() const { return static_cast<int>(columns.size()); }
  int slots() const { return n / 2; }

  /// Throws InvalidArgument if any structural invariant is broken.
  void validate() const;
};

int optical_depth(const ColumnedTopology& t);
int node_count(const ColumnedTopology& t);

/// Breadth-first traversal of the netlist: every node lands in the column
/// 1 + max(column of its producers). Throws DanglingLinkError or CycleError.
ColumnedTopology compactify(const Netlist& netlist);

/// Expands a columned topology back into a netlist (node ids from labels).
Netlist to_netlist(const ColumnedTopology& t);

/// Column index of each node id as assigned by `compactify`.
std::map<int, int> node_columns(const ColumnedTopology& t);

ColumnedTopology rectangular(int n);
ColumnedTopology triangular(int n);
ColumnedTopology butterfly(int n);

/// Random acyclic netlist: each node couples two currently-open links.
Netlist random_dag_netlist(int n_inputs, int n_nodes, std::uint64_t seed);

/// Rewires one consumer so that a node becomes reachable from its own output.
Netlist cyclify(const Netlist& dag, std::uint64_t seed);

}  // namespace meshforge
