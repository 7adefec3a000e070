#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gcb::graph {

/// 1-based node identifier. Node N (the largest id) is the reward node.
using NodeId = int;

/// Depth and degree statistics of a DAG.
struct GraphStats {
  std::vector<int> depths;      ///< per node (index id-1), longest path ending at the node
  std::vector<int> in_degrees;  ///< per node, |Pa(i)|
  int max_in_degree = 0;
  int max_depth = 0;
};

/// Returns a topological order of the nodes described by `parents`
/// (parents[i-1] lists the parents of node i). Among nodes that are ready at
/// the same time, smaller ids come first. Throws CycleDetected.
std::vector<NodeId> validate_and_order(int node_count, const std::vector<std::vector<NodeId>>& parents);

/// A known causal graph. Immutable after construction; the topological order
/// is computed once and cached.
class Dag {
 public:
  /// Throws std::invalid_argument on malformed parent lists and CycleDetected on cycles.
  Dag(int node_count, std::vector<std::vector<NodeId>> parents);

  /// Builds a graph from (from, to) edges; parent lists are sorted ascending.
  static Dag from_edges(int node_count, const std::vector<std::pair<NodeId, NodeId>>& edges);

  int node_count() const { return static_cast<int>(parents_.size()); }
  NodeId reward_node() const { return node_count(); }
  std::span<const NodeId> parents(NodeId i) const { return parents_.at(static_cast<std::size_t>(i - 1)); }
  std::span<const NodeId> children(NodeId i) const { return children_.at(static_cast<std::size_t>(i - 1)); }
  const std::vector<NodeId>& topological_order() const { return order_; }
  const std::vector<std::vector<NodeId>>& parent_lists() const { return parents_; }

  /// True if `ancestor` has a directed path to `node` (a node is not its own ancestor).
  bool is_ancestor(NodeId ancestor, NodeId node) const;

 private:
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<NodeId> order_;
};

GraphStats compute_stats(const Dag& dag);

/// L fully connected layers of d nodes each, followed by a reward node whose
/// parents are the last layer. Layer k holds ids (k-1)d+1 .. kd.
Dag hierarchical_graph(int d, int L);

}  // namespace gcb::graph
