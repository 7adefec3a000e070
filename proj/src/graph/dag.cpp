#include "gcb/graph/dag.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>

#include "gcb/errors.hpp"

namespace gcb::graph {

std::vector<NodeId> validate_and_order(int node_count, const std::vector<std::vector<NodeId>>& parents) {
  if (node_count < 1) throw std::invalid_argument("graph needs at least one node");
  if (static_cast<int>(parents.size()) != node_count)
    throw std::invalid_argument("parent list count differs from node count");

  std::vector<int> pending(static_cast<std::size_t>(node_count), 0);
  std::vector<std::vector<NodeId>> children(static_cast<std::size_t>(node_count));
  for (NodeId i = 1; i <= node_count; ++i) {
    const auto& pa = parents[static_cast<std::size_t>(i - 1)];
    std::vector<NodeId> sorted = pa;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("duplicate parent of node " + std::to_string(i));
    for (NodeId p : pa) {
      if (p < 1 || p > node_count)
        throw std::invalid_argument("parent id " + std::to_string(p) + " of node " + std::to_string(i) +
                                    " out of range");
      children[static_cast<std::size_t>(p - 1)].push_back(i);
    }
    pending[static_cast<std::size_t>(i - 1)] = static_cast<int>(pa.size());
  }

  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId i = 1; i <= node_count; ++i)
    if (pending[static_cast<std::size_t>(i - 1)] == 0) ready.push(i);

  std::vector<NodeId> order;
  order.reserve(static_cast<std::size_t>(node_count));
  while (!ready.empty()) {
    NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (NodeId c : children[static_cast<std::size_t>(v - 1)])
      if (--pending[static_cast<std::size_t>(c - 1)] == 0) ready.push(c);
  }
  if (static_cast<int>(order.size()) != node_count)
    throw CycleDetected("graph contains a directed cycle");
  return order;
}

Dag::Dag(int node_count, std::vector<std::vector<NodeId>> parents) : parents_(std::move(parents)) {
  order_ = validate_and_order(node_count, parents_);
  children_.resize(parents_.size());
  for (NodeId i = 1; i <= node_count; ++i)
    for (NodeId p : parents_[static_cast<std::size_t>(i - 1)]) children_[static_cast<std::size_t>(p - 1)].push_back(i);
  for (auto& c : children_) std::sort(c.begin(), c.end());
}

Dag Dag::from_edges(int node_count, const std::vector<std::pair<NodeId, NodeId>>& edges) {
  if (node_count < 1) throw std::invalid_argument("graph needs at least one node");
  std::vector<std::vector<NodeId>> parents(static_cast<std::size_t>(node_count));
  for (auto [from, to] : edges) {
    if (to < 1 || to > node_count) throw std::invalid_argument("edge target out of range");
    parents[static_cast<std::size_t>(to - 1)].push_back(from);
  }
  for (auto& p : parents) std::sort(p.begin(), p.end());
  return Dag(node_count, std::move(parents));
}

bool Dag::is_ancestor(NodeId ancestor, NodeId node) const {
  std::vector<char> seen(parents_.size(), 0);
  std::vector<NodeId> stack(parents(node).begin(), parents(node).end());
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (v == ancestor) return true;
    if (seen[static_cast<std::size_t>(v - 1)]) continue;
    seen[static_cast<std::size_t>(v - 1)] = 1;
    for (NodeId p : parents(v)) stack.push_back(p);
  }
  return false;
}

GraphStats compute_stats(const Dag& dag) {
  GraphStats s;
  const auto n = static_cast<std::size_t>(dag.node_count());
  s.depths.assign(n, 0);
  s.in_degrees.assign(n, 0);
  for (NodeId v : dag.topological_order()) {
    auto pa = dag.parents(v);
    int depth = 0;
    for (NodeId p : pa) depth = std::max(depth, s.depths[static_cast<std::size_t>(p - 1)] + 1);
    s.depths[static_cast<std::size_t>(v - 1)] = depth;
    s.in_degrees[static_cast<std::size_t>(v - 1)] = static_cast<int>(pa.size());
  }
  s.max_in_degree = *std::max_element(s.in_degrees.begin(), s.in_degrees.end());
  s.max_depth = *std::max_element(s.depths.begin(), s.depths.end());
  return s;
}

Dag hierarchical_graph(int d, int L) {
  if (d < 1 || L < 1) throw std::invalid_argument("hierarchical graph needs d >= 1 and L >= 1");
  const int n = d * L + 1;
  std::vector<std::vector<NodeId>> parents(static_cast<std::size_t>(n));
  for (int layer = 2; layer <= L; ++layer) {
    for (int k = 0; k < d; ++k) {
      NodeId node = (layer - 1) * d + k + 1;
      for (int j = 0; j < d; ++j) parents[static_cast<std::size_t>(node - 1)].push_back((layer - 2) * d + j + 1);
    }
  }
  for (int j = 0; j < d; ++j) parents[static_cast<std::size_t>(n - 1)].push_back((L - 1) * d + j + 1);
  return Dag(n, std::move(parents));
}

}  // namespace gcb::graph
