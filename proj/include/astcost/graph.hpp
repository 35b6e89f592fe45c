#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace astcost {

using NodeIndex = std::size_t;
using Edge = std::pair<NodeIndex, NodeIndex>;  // (parent, child)

/// One tensor-program configuration: its AST plus the measured runtime.
///
/// Edges are stored parent -> child only; the reverse direction is implied by
/// the tree shape. Construction validates every invariant and the object is
/// immutable afterwards, so a constructed AstGraph is always a rooted tree.
class AstGraph {
 public:
  /// Throws DataError describing the first violated invariant.
  AstGraph(std::size_t node_count, std::vector<Edge> edges, std::size_t feature_dim,
           std::vector<double> features, std::vector<std::uint32_t> node_types, double runtime,
           NodeIndex root);

  std::size_t node_count() const { return node_count_; }
  std::size_t feature_dim() const { return feature_dim_; }
  NodeIndex root() const { return root_; }
  double runtime() const { return runtime_; }

  const std::vector<Edge>& edges() const { return edges_; }
  /// Row-major node_count x feature_dim.
  const std::vector<double>& features() const { return features_; }
  std::span<const double> feature_row(NodeIndex node) const;
  double feature(NodeIndex node, std::size_t column) const {
    return features_[node * feature_dim_ + column];
  }
  const std::vector<std::uint32_t>& node_types() const { return node_types_; }

  /// Parent of every node; the root maps to itself.
  const std::vector<NodeIndex>& parents() const { return parent_; }
  bool is_root(NodeIndex node) const { return node == root_; }
  const std::vector<NodeIndex>& topological_order() const { return order_; }

  /// Same structure and features with a different target.
  AstGraph with_runtime(double runtime) const;

  friend bool operator==(const AstGraph&, const AstGraph&) = default;

 private:
  std::size_t node_count_;
  std::vector<Edge> edges_;
  std::size_t feature_dim_;
  std::vector<double> features_;
  std::vector<std::uint32_t> node_types_;
  double runtime_;
  NodeIndex root_;

  std::vector<NodeIndex> parent_;
  std::vector<std::size_t> child_offsets_;
  std::vector<NodeIndex> child_list_;
  std::vector<NodeIndex> order_;

  friend std::vector<NodeIndex> children(const AstGraph& graph, NodeIndex node);
};

/// Children of `node` in stored edge order. Throws std::out_of_range.
std::vector<NodeIndex> children(const AstGraph& graph, NodeIndex node);

/// Root first, parents before children, ready nodes taken by smallest index.
/// Throws DataError if the edge set contains a cycle or unreachable nodes.
std::vector<NodeIndex> topological_order(std::size_t node_count, std::span<const Edge> edges,
                                         NodeIndex root);
inline std::vector<NodeIndex> topological_order(const AstGraph& graph) {
  return graph.topological_order();
}

/// One row of the Conv2D workload table.
struct WorkloadMeta {
  std::string id;
  int height = 1;
  int width = 1;
  int c_in = 1;
  int c_out = 1;
  std::array<int, 2> kernel{1, 1};
  std::array<int, 2> stride{1, 1};
  std::array<int, 2> padding{0, 0};
  std::array<int, 2> dilation{1, 1};
  std::size_t config_count = 1;

  friend bool operator==(const WorkloadMeta&, const WorkloadMeta&) = default;
};

struct LabeledGraph {
  std::string workload_id;
  AstGraph graph;

  friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;
};

struct Dataset {
  std::vector<WorkloadMeta> workloads;
  std::vector<LabeledGraph> graphs;
  std::size_t feature_dim = 1;
  std::size_t type_vocab_size = 1;

  /// Throws DataError if any cross-graph invariant fails.
  void validate() const;

  const WorkloadMeta* find_workload(const std::string& id) const;
  std::vector<double> runtimes() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace astcost
