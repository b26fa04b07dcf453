#include "meshforge/topology.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_map>

#include "meshforge/errors.hpp"

namespace meshforge {

bool is_permutation(const Permutation& perm, int n) {
  if (static_cast<int>(perm.size()) != n) return false;
  std::vector<char> seen(n, 0);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[p]) return false;
    seen[p] = 1;
  }
  return true;
}

Permutation identity_permutation(int n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

Permutation inverse(const Permutation& perm) {
  Permutation inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
  return inv;
}

Permutation compose(const Permutation& first, const Permutation& second) {
  // (second (first v))[i] = (first v)[second[i]] = v[first[second[i]]]
  Permutation out(second.size());
  for (std::size_t i = 0; i < second.size(); ++i) out[i] = first[second[i]];
  return out;
}

void ColumnedTopology::validate() const {
  if (n < 2) throw InvalidArgument("topology needs at least two modes");
  if (node_labels.size() != columns.size()) {
    throw InvalidArgument("node label table does not match column count");
  }
  std::set<int> ids;
  for (std::size_t l = 0; l < columns.size(); ++l) {
    const Column& col = columns[l];
    if (!is_permutation(col.perm, n)) {
      throw InvalidArgument("column " + std::to_string(l) + " permutation is not a bijection");
    }
    if (col.active < 1 || col.active > slots()) {
      throw InvalidArgument("column " + std::to_string(l) + " has invalid active node count");
    }
    if (static_cast<int>(node_labels[l].size()) != col.active) {
      throw InvalidArgument("column " + std::to_string(l) + " label count mismatch");
    }
    for (int id : node_labels[l]) {
      if (!ids.insert(id).second) {
        throw InvalidArgument("node id " + std::to_string(id) + " appears twice");
      }
    }
  }
  if (!is_permutation(final_perm, n)) throw InvalidArgument("final permutation is not a bijection");
}

int optical_depth(const ColumnedTopology& t) { return t.depth(); }

int node_count(const ColumnedTopology& t) {
  int total = 0;
  for (const auto& c : t.columns) total += c.active;
  return total;
}

namespace {

struct Producer {
  int node = -1;  // -1: device input
  int port = 0;
};

struct Consumer {
  int node = -1;  // -1: device output
  int port = 0;   // output index when node == -1
};

// Builds a topology from per-column slot orderings. ordering[l][i] is the
// physical waveguide routed to slot i in column l. Columns with no active
// nodes are dropped; their routing folds into the next column.
ColumnedTopology from_orderings(int n, const std::vector<Permutation>& ordering,
                                const std::vector<int>& active, std::string arch) {
  ColumnedTopology t;
  t.n = n;
  t.architecture = std::move(arch);
  Permutation current = identity_permutation(n);
  int next_id = 0;
  for (std::size_t l = 0; l < ordering.size(); ++l) {
    if (active[l] <= 0) continue;
    // relative routing from the current slot order to the desired one
    const Permutation where = inverse(current);
    Permutation rel(n);
    for (int i = 0; i < n; ++i) rel[i] = where[ordering[l][i]];
    t.columns.push_back({rel, active[l]});
    std::vector<int> labels(active[l]);
    std::iota(labels.begin(), labels.end(), next_id);
    next_id += active[l];
    t.node_labels.push_back(std::move(labels));
    current = ordering[l];
  }
  t.final_perm = inverse(current);
  return t;
}

Permutation shifted(int n, int shift) {
  Permutation p(n);
  for (int i = 0; i < n; ++i) p[i] = ((i + shift) % n + n) % n;
  return p;
}

}  // namespace

ColumnedTopology compactify(const Netlist& netlist) {
  const int n = netlist.n_inputs;
  if (n < 2) throw InvalidArgument("netlist needs at least two inputs");
  if (static_cast<int>(netlist.outputs.size()) != n) {
    throw InvalidArgument("netlist must designate exactly " + std::to_string(n) + " outputs");
  }
  const auto& nodes = netlist.couplings;
  const int k = static_cast<int>(nodes.size());

  {
    std::set<int> ids;
    for (const auto& c : nodes) {
      if (!ids.insert(c.node_id).second) {
        throw InvalidArgument("duplicate node id " + std::to_string(c.node_id));
      }
    }
  }

  std::unordered_map<int, Producer> producer;
  std::unordered_map<int, Consumer> consumer;
  auto add_producer = [&](int link, Producer p) {
    if (!producer.emplace(link, p).second) throw DanglingLinkError(link, "has two producers");
  };
  auto add_consumer = [&](int link, Consumer c) {
    if (!consumer.emplace(link, c).second) throw DanglingLinkError(link, "has two consumers");
  };
  for (int i = 0; i < n; ++i) add_producer(i, {});
  for (int idx = 0; idx < k; ++idx) {
    const auto& c = nodes[idx];
    add_producer(c.out_top, {idx, 0});
    add_producer(c.out_bottom, {idx, 1});
    add_consumer(c.in_top, {idx, 0});
    add_consumer(c.in_bottom, {idx, 1});
  }
  for (int o = 0; o < n; ++o) add_consumer(netlist.outputs[o], {-1, o});
  for (const auto& [link, p] : producer) {
    if (!consumer.count(link)) throw DanglingLinkError(link, "is never consumed");
  }
  for (const auto& [link, c] : consumer) {
    if (!producer.count(link)) throw DanglingLinkError(link, "has no producer");
  }

  // Kahn traversal: a node fires once both input links have been traversed.
  std::vector<int> pending(k, 0);
  std::vector<int> column(k, 0);
  std::deque<int> ready;
  for (int idx = 0; idx < k; ++idx) {
    for (int link : {nodes[idx].in_top, nodes[idx].in_bottom}) {
      if (producer.at(link).node >= 0) ++pending[idx];
    }
    if (pending[idx] == 0) ready.push_back(idx);
  }
  int visited = 0;
  while (!ready.empty()) {
    const int idx = ready.front();
    ready.pop_front();
    ++visited;
    int depth = 0;
    for (int link : {nodes[idx].in_top, nodes[idx].in_bottom}) {
      const int p = producer.at(link).node;
      if (p >= 0) depth = std::max(depth, column[p]);
    }
    column[idx] = depth + 1;
    for (int link : {nodes[idx].out_top, nodes[idx].out_bottom}) {
      const int c = consumer.at(link).node;
      if (c >= 0 && --pending[c] == 0) ready.push_back(c);
    }
  }

  if (visited != k) {
    // Strip unvisited nodes that only feed visited ones; what remains sits on
    // or between cycles.
    std::vector<char> stuck(k, 0);
    for (int idx = 0; idx < k; ++idx) stuck[idx] = pending[idx] > 0;
    bool changed = true;
    while (changed) {
      changed = false;
      for (int idx = 0; idx < k; ++idx) {
        if (!stuck[idx]) continue;
        bool feeds_stuck = false;
        for (int link : {nodes[idx].out_top, nodes[idx].out_bottom}) {
          const int c = consumer.at(link).node;
          if (c >= 0 && stuck[c]) feeds_stuck = true;
        }
        if (!feeds_stuck) {
          stuck[idx] = 0;
          changed = true;
        }
      }
    }
    std::vector<int> ids;
    for (int idx = 0; idx < k; ++idx) {
      if (stuck[idx]) ids.push_back(nodes[idx].node_id);
    }
    std::sort(ids.begin(), ids.end());
    throw CycleError(std::move(ids));
  }

  const int depth = k ? *std::max_element(column.begin(), column.end()) : 0;
  std::vector<std::vector<int>> by_column(depth);
  for (int idx = 0; idx < k; ++idx) by_column[column[idx] - 1].push_back(idx);

  ColumnedTopology t;
  t.n = n;
  std::vector<int> slot_link(n);
  std::iota(slot_link.begin(), slot_link.end(), 0);
  for (auto& members : by_column) {
    std::sort(members.begin(), members.end(),
              [&](int a, int b) { return nodes[a].node_id < nodes[b].node_id; });
    std::unordered_map<int, int> slot_of;
    for (int i = 0; i < n; ++i) slot_of[slot_link[i]] = i;

    std::vector<int> next(n, -1);
    std::vector<char> used(n, 0);
    std::vector<int> labels;
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto& c = nodes[members[m]];
      next[2 * m] = c.in_top;
      next[2 * m + 1] = c.in_bottom;
      used[slot_of.at(c.in_top)] = 1;
      used[slot_of.at(c.in_bottom)] = 1;
      labels.push_back(c.node_id);
    }
    // pass-through links keep their relative order below the active pairs
    int fill = 2 * static_cast<int>(members.size());
    for (int i = 0; i < n; ++i) {
      if (!used[i]) next[fill++] = slot_link[i];
    }
    Permutation perm(n);
    for (int i = 0; i < n; ++i) perm[i] = slot_of.at(next[i]);
    for (std::size_t m = 0; m < members.size(); ++m) {
      next[2 * m] = nodes[members[m]].out_top;
      next[2 * m + 1] = nodes[members[m]].out_bottom;
    }
    t.columns.push_back({std::move(perm), static_cast<int>(members.size())});
    t.node_labels.push_back(std::move(labels));
    slot_link = std::move(next);
  }
  std::unordered_map<int, int> slot_of;
  for (int i = 0; i < n; ++i) slot_of[slot_link[i]] = i;
  t.final_perm.resize(n);
  for (int o = 0; o < n; ++o) t.final_perm[o] = slot_of.at(netlist.outputs[o]);
  return t;
}

Netlist to_netlist(const ColumnedTopology& t) {
  Netlist net;
  net.n_inputs = t.n;
  std::vector<int> slot_link(t.n);
  std::iota(slot_link.begin(), slot_link.end(), 0);
  int next_link = t.n;
  for (std::size_t l = 0; l < t.columns.size(); ++l) {
    const Column& col = t.columns[l];
    std::vector<int> routed(t.n);
    for (int i = 0; i < t.n; ++i) routed[i] = slot_link[col.perm[i]];
    for (int m = 0; m < col.active; ++m) {
      Coupling c;
      c.node_id = t.node_labels[l][m];
      c.in_top = routed[2 * m];
      c.in_bottom = routed[2 * m + 1];
      c.out_top = next_link++;
      c.out_bottom = next_link++;
      routed[2 * m] = c.out_top;
      routed[2 * m + 1] = c.out_bottom;
      net.couplings.push_back(c);
    }
    slot_link = std::move(routed);
  }
  net.outputs.resize(t.n);
  for (int o = 0; o < t.n; ++o) net.outputs[o] = slot_link[t.final_perm[o]];
  return net;
}

std::map<int, int> node_columns(const ColumnedTopology& t) {
  std::map<int, int> out;
  for (std::size_t l = 0; l < t.node_labels.size(); ++l) {
    for (int id : t.node_labels[l]) out[id] = static_cast<int>(l);
  }
  return out;
}

ColumnedTopology rectangular(int n) {
  if (n < 2) throw InvalidArgument("rectangular mesh needs N >= 2");
  const int m = n / 2;
  std::vector<Permutation> ordering;
  std::vector<int> active;
  for (int l = 1; l <= n; ++l) {
    const bool odd = (l % 2) == 1;
    // even columns couple waveguides (2k+1, 2k+2): shift everything up by one
    ordering.push_back(odd ? identity_permutation(n) : shifted(n, 1));
    active.push_back(n % 2 == 0 ? m - 1 + (l % 2) : m);
  }
  return from_orderings(n, ordering, active, "rectangular");
}

ColumnedTopology triangular(int n) {
  if (n < 3) throw InvalidArgument("triangular mesh needs N >= 3");
  std::vector<Permutation> ordering;
  std::vector<int> active;
  for (int l = 1; l <= 2 * n - 3; ++l) {
    ordering.push_back(l % 2 == 1 ? identity_permutation(n) : shifted(n, 1));
    const int reach = std::min(l, 2 * n - 2 - l);
    active.push_back((reach + 1) / 2);
  }
  return from_orderings(n, ordering, active, "triangular");
}

ColumnedTopology butterfly(int n) {
  if (n < 2 || (n & (n - 1)) != 0) {
    throw InvalidArgument("butterfly mesh needs N to be a power of two");
  }
  std::vector<Permutation> ordering;
  std::vector<int> active;
  for (int bit = 1; bit < n; bit <<= 1) {
    Permutation p;
    for (int i = 0; i < n; ++i) {
      if (i & bit) continue;
      p.push_back(i);
      p.push_back(i | bit);
    }
    ordering.push_back(std::move(p));
    active.push_back(n / 2);
  }
  return from_orderings(n, ordering, active, "butterfly");
}

Netlist random_dag_netlist(int n_inputs, int n_nodes, std::uint64_t seed) {
  if (n_inputs < 2) throw InvalidArgument("random netlist needs at least two inputs");
  std::mt19937_64 rng(seed);
  Netlist net;
  net.n_inputs = n_inputs;
  std::vector<int> open(n_inputs);
  std::iota(open.begin(), open.end(), 0);
  int next_link = n_inputs;
  for (int k = 0; k < n_nodes; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    Coupling c;
    c.node_id = k;
    c.in_top = open[a];
    c.in_bottom = open[b];
    c.out_top = next_link++;
    c.out_bottom = next_link++;
    open[a] = c.out_top;
    open[b] = c.out_bottom;
    net.couplings.push_back(c);
  }
  std::shuffle(open.begin(), open.end(), rng);
  net.outputs = open;
  return net;
}

Netlist cyclify(const Netlist& dag, std::uint64_t seed) {
  if (dag.couplings.empty()) throw InvalidArgument("cannot close a cycle without nodes");
  std::mt19937_64 rng(seed);
  Netlist net = dag;
  auto& nodes = net.couplings;
  const int k = static_cast<int>(nodes.size());
  std::unordered_map<int, int> consumer_node;
  for (int idx = 0; idx < k; ++idx) {
    consumer_node[nodes[idx].in_top] = idx;
    consumer_node[nodes[idx].in_bottom] = idx;
  }
  const int a = std::uniform_int_distribution<int>(0, k - 1)(rng);
  std::vector<int> reach{a};
  std::vector<char> seen(k, 0);
  seen[a] = 1;
  for (std::size_t i = 0; i < reach.size(); ++i) {
    for (int link : {nodes[reach[i]].out_top, nodes[reach[i]].out_bottom}) {
      auto it = consumer_node.find(link);
      if (it != consumer_node.end() && !seen[it->second]) {
        seen[it->second] = 1;
        reach.push_back(it->second);
      }
    }
  }
  const int b = reach[std::uniform_int_distribution<std::size_t>(0, reach.size() - 1)(rng)];
  const bool a_top = std::bernoulli_distribution(0.5)(rng);
  const bool b_top = std::bernoulli_distribution(0.5)(rng);
  int& a_in = a_top ? nodes[a].in_top : nodes[a].in_bottom;
  const int fed_back = b_top ? nodes[b].out_top : nodes[b].out_bottom;
  const int displaced = a_in;

  // whoever consumed fed_back now consumes the displaced link instead
  auto it = consumer_node.find(fed_back);
  if (it != consumer_node.end()) {
    auto& y = nodes[it->second];
    (y.in_top == fed_back ? y.in_top : y.in_bottom) = displaced;
  } else {
    for (int& o : net.outputs) {
      if (o == fed_back) o = displaced;
    }
  }
  a_in = fed_back;
  return net;
}

}  // namespace meshforge
