#include "astcost/graph.hpp"

#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "astcost/errors.hpp"

namespace astcost {

AstGraph::AstGraph(std::size_t node_count, std::vector<Edge> edges, std::size_t feature_dim,
                   std::vector<double> features, std::vector<std::uint32_t> node_types,
                   double runtime, NodeIndex root)
    : node_count_(node_count),
      edges_(std::move(edges)),
      feature_dim_(feature_dim),
      features_(std::move(features)),
      node_types_(std::move(node_types)),
      runtime_(runtime),
      root_(root) {
  if (node_count_ == 0) throw DataError("graph has no nodes");
  if (feature_dim_ == 0) throw DataError("feature_dim must be positive");
  if (root_ >= node_count_) throw DataError("root index out of range");
  if (features_.size() != node_count_ * feature_dim_) {
    throw DataError("features hold " + std::to_string(features_.size()) + " values, expected " +
                    std::to_string(node_count_) + " rows x " + std::to_string(feature_dim_));
  }
  if (node_types_.size() != node_count_) {
    throw DataError("node_types has " + std::to_string(node_types_.size()) +
                    " entries for " + std::to_string(node_count_) + " nodes");
  }
  if (!(runtime_ > 0.0) || !std::isfinite(runtime_)) throw DataError("runtime must be positive and finite");
  for (double v : features_) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
  if (edges_.size() != node_count_ - 1) {
    throw DataError("tree with " + std::to_string(node_count_) + " nodes needs " +
                    std::to_string(node_count_ - 1) + " edges, got " + std::to_string(edges_.size()));
  }

  parent_.assign(node_count_, node_count_);
  parent_[root_] = root_;
  std::vector<std::size_t> child_counts(node_count_, 0);
  for (const auto& [p, c] : edges_) {
    if (p >= node_count_ || c >= node_count_) throw DataError("edge endpoint out of range");
    if (p == c) throw DataError("self-loop on node " + std::to_string(p));
    if (c == root_) throw DataError("root has a parent");
    if (parent_[c] != node_count_) throw DataError("node " + std::to_string(c) + " has two parents");
    parent_[c] = p;
    ++child_counts[p];
  }

  child_offsets_.assign(node_count_ + 1, 0);
  for (std::size_t i = 0; i < node_count_; ++i) child_offsets_[i + 1] = child_offsets_[i] + child_counts[i];
  child_list_.resize(edges_.size());
  std::vector<std::size_t> cursor(child_offsets_.begin(), child_offsets_.end() - 1);
  for (const auto& [p, c] : edges_) child_list_[cursor[p]++] = c;

  order_ = astcost::topological_order(node_count_, edges_, root_);
}

std::span<const double> AstGraph::feature_row(NodeIndex node) const {
  if (node >= node_count_) throw std::out_of_range("feature_row: node out of range");
  return {features_.data() + node * feature_dim_, feature_dim_};
}

AstGraph AstGraph::with_runtime(double runtime) const {
  return AstGraph(node_count_, edges_, feature_dim_, features_, node_types_, runtime, root_);
}

std::vector<NodeIndex> children(const AstGraph& graph, NodeIndex node) {
  if (node >= graph.node_count_) {
    throw std::out_of_range("children: node " + std::to_string(node) + " out of range");
  }
  return {graph.child_list_.begin() + static_cast<std::ptrdiff_t>(graph.child_offsets_[node]),
          graph.child_list_.begin() + static_cast<std::ptrdiff_t>(graph.child_offsets_[node + 1])};
}

std::vector<NodeIndex> topological_order(std::size_t node_count, std::span<const Edge> edges,
                                         NodeIndex root) {
  if (root >= node_count) throw DataError("root index out of range");
  std::vector<std::vector<NodeIndex>> out(node_count);
  std::vector<std::size_t> in_degree(node_count, 0);
  for (const auto& [p, c] : edges) {
    if (p >= node_count || c >= node_count) throw DataError("edge endpoint out of range");
    out[p].push_back(c);
    ++in_degree[c];
  }
  if (in_degree[root] != 0) throw DataError("cycle detected: root has an incoming edge");

  std::priority_queue<NodeIndex, std::vector<NodeIndex>, std::greater<>> ready;
  ready.push(root);
  std::vector<NodeIndex> order;
  order.reserve(node_count);
  while (!ready.empty()) {
    NodeIndex v = ready.top();
    ready.pop();
    order.push_back(v);
    for (NodeIndex c : out[v]) {
      if (--in_degree[c] == 0) ready.push(c);
    }
  }
  if (order.size() != node_count) {
    throw DataError("cycle detected or graph disconnected: ordered " + std::to_string(order.size()) +
                    " of " + std::to_string(node_count) + " nodes");
  }
  return order;
}

void Dataset::validate() const {
  if (feature_dim == 0) throw DataError("dataset feature_dim must be positive");
  if (type_vocab_size == 0) throw DataError("dataset type_vocab_size must be positive");
  std::unordered_set<std::string> ids;
  for (const auto& w : workloads) {
    if (!ids.insert(w.id).second) throw DataError("duplicate workload id " + w.id);
    if (w.config_count == 0) throw DataError("workload " + w.id + " has config_count 0");
  }
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& [wid, g] = graphs[i];
    if (!ids.contains(wid)) throw DataError("graph " + std::to_string(i) + " references unknown workload " + wid);
    if (g.feature_dim() != feature_dim) {
      throw DataError("graph " + std::to_string(i) + " has feature width " + std::to_string(g.feature_dim()) +
                      ", dataset declares " + std::to_string(feature_dim));
    }
    for (auto t : g.node_types()) {
      if (t >= type_vocab_size) {
        throw DataError("graph " + std::to_string(i) + " has node type " + std::to_string(t) +
                        " outside vocabulary of size " + std::to_string(type_vocab_size));
      }
    }
  }
}

const WorkloadMeta* Dataset::find_workload(const std::string& id) const {
  for (const auto& w : workloads) {
    if (w.id == id) return &w;
  }
  return nullptr;
}

std::vector<double> Dataset::runtimes() const {
  std::vector<double> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(g.graph.runtime());
  return out;
}

}  // namespace astcost
