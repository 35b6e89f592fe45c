#include "astcost/synth.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "astcost/errors.hpp"
#include "astcost/rng.hpp"
#include "astcost/workloads.hpp"

namespace astcost::synth {
namespace {

constexpr double kExtentMenu[] = {2, 4, 8, 16, 32, 64};
constexpr double kMaxLoopProduct = 65536.0;
constexpr std::size_t kMaxNodes = 48;
constexpr std::size_t kMaxPairNodes = 14;

bool is_leaf_type(std::uint32_t t) { return t == kCompute || t == kLoad || t == kStore; }

double leaf_weight(std::uint32_t t) {
  switch (t) {
    case kCompute: return kComputeWeight;
    case kLoad: return kLoadWeight;
    case kStore: return kStoreWeight;
    default: return 0.0;
  }
}

// Oracle on raw arrays; `order` must be a parent-first ordering.
double oracle_raw(std::span<const NodeIndex> order, std::span<const NodeIndex> parent,
                  std::span<const std::uint32_t> types, std::span<const double> extents) {
  std::vector<double> scale(types.size(), 1.0);  // product over strict ancestors
  double total = 0.0;
  for (NodeIndex v : order) {
    if (types[v] >= kTypeVocabSize) throw DataError("oracle: unknown node type " + std::to_string(types[v]));
    const NodeIndex p = parent[v];
    if (p != v) {
      double s = scale[p];
      switch (types[p]) {
        case kFor: s *= extents[p]; break;
        case kVectorize: s /= kVectorizeDivisor; break;
        case kUnroll: s *= kUnrollFactor; break;
        default: break;
      }
      scale[v] = s;
    }
    if (is_leaf_type(types[v])) total += leaf_weight(types[v]) * scale[v];
  }
  return kRuntimeScale * total;
}

std::vector<NodeIndex> parent_array(std::size_t n, std::span<const Edge> edges, NodeIndex root) {
  std::vector<NodeIndex> parent(n, root);
  parent[root] = root;
  for (const auto& [p, c] : edges) parent[c] = p;
  return parent;
}

struct RawTree {
  std::vector<std::uint32_t> types;
  std::vector<double> extents;
  std::vector<Edge> edges;
};

class TreeBuilder {
 public:
  TreeBuilder(Rng& rng, WorkloadShape shape, std::size_t max_nodes)
      : rng_(rng), shape_(shape), max_nodes_(max_nodes) {}

  RawTree build() {
    tree_ = {};
    add(kRoot, 1.0, std::nullopt);
    body(0, 0, 1.0, false);
    return std::move(tree_);
  }

 private:
  NodeIndex add(std::uint32_t type, double extent, std::optional<NodeIndex> parent) {
    NodeIndex id = tree_.types.size();
    tree_.types.push_back(type);
    tree_.extents.push_back(extent);
    if (parent) tree_.edges.emplace_back(*parent, id);
    return id;
  }

  void body(NodeIndex parent, int depth, double loop_product, bool vectorized) {
    const auto k = rng_.uniform_int(1, shape_.branching);
    for (std::int64_t c = 0; c < k; ++c) {
      if (c > 0 && tree_.types.size() >= max_nodes_) break;
      // Children of the root always open a loop nest.
      const bool outer = depth == 0;
      const bool nested = depth + 1 < shape_.max_depth && tree_.types.size() + 2 <= max_nodes_ &&
                          (outer || rng_.uniform() < 0.7);
      if (nested) {
        const double r = outer ? 1.0 : rng_.uniform();
        if (r < 0.12 && !vectorized) {
          body(add(kVectorize, 1.0, parent), depth + 1, loop_product, true);
          continue;
        }
        if (r < 0.24) {
          body(add(kUnroll, 1.0, parent), depth + 1, loop_product, vectorized);
          continue;
        }
        std::vector<double> allowed;
        for (double e : kExtentMenu) {
          if (loop_product * e <= kMaxLoopProduct) allowed.push_back(e);
        }
        if (!allowed.empty()) {
          const double e = allowed[static_cast<std::size_t>(
              rng_.uniform_int(0, static_cast<std::int64_t>(allowed.size()) - 1))];
          body(add(kFor, e, parent), depth + 1, loop_product * e, vectorized);
          continue;
        }
      }
      const double r = rng_.uniform();
      add(r < 0.5 ? kCompute : (r < 0.75 ? kLoad : kStore), 1.0, parent);
    }
  }

  Rng& rng_;
  WorkloadShape shape_;
  std::size_t max_nodes_;
  RawTree tree_;
};

AstGraph to_graph(const RawTree& t, std::vector<double> features, double runtime) {
  return AstGraph(t.types.size(), t.edges, kFeatureDim, std::move(features), t.types, runtime, 0);
}

std::vector<WorkloadMeta> workload_table(const SynthConfig& config) {
  std::vector<WorkloadMeta> metas;
  if (config.graphs_per_workload == 0) return metas;
  const auto& resnet = resnet18_workloads();
  for (std::size_t i = 0; i < config.workload_specs.size(); ++i) {
    WorkloadMeta m = i < resnet.size() ? resnet[i] : WorkloadMeta{};
    m.id = "C" + std::to_string(i + 1);
    m.config_count = config.graphs_per_workload;
    metas.push_back(std::move(m));
  }
  return metas;
}

double apply_noise(double runtime, double noise_std, Rng& rng) {
  if (noise_std <= 0.0) return runtime;
  return runtime * std::exp(rng.normal(0.0, noise_std));
}

}  // namespace

std::vector<WorkloadShape> SynthConfig::default_workload_specs() {
  return {{4, 2}, {5, 2}, {3, 3}, {5, 3}, {3, 2}, {6, 2}, {4, 3}, {3, 4}, {6, 3}, {5, 2}, {4, 4}, {7, 2}};
}

void SynthConfig::validate() const {
  if (!(noise_std >= 0.0) || !(noise_std < 0.5)) throw std::invalid_argument("noise_std must be in [0, 0.5)");
  for (const auto& s : workload_specs) {
    if (s.max_depth < 2 || s.max_depth > 8) throw std::invalid_argument("max_depth must be in 2..8");
    if (s.branching < 1 || s.branching > 4) throw std::invalid_argument("branching must be in 1..4");
  }
}

std::vector<double> compute_features(std::size_t n, std::span<const Edge> edges,
                                     std::span<const std::uint32_t> types,
                                     std::span<const double> extents, NodeIndex root) {
  const auto order = topological_order(n, edges, root);
  const auto parent = parent_array(n, edges, root);
  std::vector<double> f(n * kFeatureDim, 0.0);
  auto at = [&](NodeIndex v, std::size_t col) -> double& { return f[v * kFeatureDim + col]; };
  for (NodeIndex v : order) {
    at(v, kLoopExtent) = types[v] == kFor ? extents[v] : 1.0;
    at(v, kIsVectorized) = types[v] == kVectorize ? 1.0 : 0.0;
    at(v, kIsUnrolled) = types[v] == kUnroll ? 1.0 : 0.0;
    if (v != root) {
      const NodeIndex p = parent[v];
      at(v, kDepth) = at(p, kDepth) + 1.0;
      at(v, kLogAncestorExtent) = at(p, kLogAncestorExtent) + (types[p] == kFor ? std::log2(extents[p]) : 0.0);
      at(v, kIsVectorized) = std::max(at(v, kIsVectorized), at(p, kIsVectorized));
      at(v, kIsUnrolled) = std::max(at(v, kIsUnrolled), at(p, kIsUnrolled));
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    at(*it, kSubtreeSize) += 1.0;
    if (*it != root) at(parent[*it], kSubtreeSize) += at(*it, kSubtreeSize);
  }
  return f;
}

double oracle_runtime(const AstGraph& graph) {
  std::vector<double> extents(graph.node_count());
  for (NodeIndex v = 0; v < graph.node_count(); ++v) extents[v] = graph.feature(v, kLoopExtent);
  return oracle_raw(graph.topological_order(), graph.parents(), graph.node_types(), extents);
}

Dataset generate(const SynthConfig& config) {
  config.validate();
  Dataset ds;
  ds.feature_dim = kFeatureDim;
  ds.type_vocab_size = kTypeVocabSize;
  ds.workloads = workload_table(config);
  for (std::size_t w = 0; w < ds.workloads.size(); ++w) {
    Rng rng(derive_seed(config.seed, w));
    TreeBuilder builder(rng, config.workload_specs[w], kMaxNodes);
    for (std::size_t g = 0; g < config.graphs_per_workload; ++g) {
      RawTree t = builder.build();
      auto features = compute_features(t.types.size(), t.edges, t.types, t.extents, 0);
      const auto order = topological_order(t.types.size(), t.edges, 0);
      const auto parent = parent_array(t.types.size(), t.edges, 0);
      const double runtime = apply_noise(oracle_raw(order, parent, t.types, t.extents), config.noise_std, rng);
      ds.graphs.push_back({ds.workloads[w].id, to_graph(t, std::move(features), runtime)});
    }
  }
  return ds;
}

Dataset make_rewired_pairs(const SynthConfig& config) {
  config.validate();
  Dataset ds;
  ds.feature_dim = kFeatureDim;
  ds.type_vocab_size = kTypeVocabSize;
  ds.workloads = workload_table(config);
  for (std::size_t w = 0; w < ds.workloads.size(); ++w) {
    ds.workloads[w].config_count = 2 * config.graphs_per_workload;
    Rng rng(derive_seed(config.seed ^ 0x5157a1d5ULL, w));
    TreeBuilder builder(rng, config.workload_specs[w], kMaxPairNodes);
    for (std::size_t made = 0; made < config.graphs_per_workload;) {
      RawTree t = builder.build();
      const std::size_t n = t.types.size();
      const auto order = topological_order(n, t.edges, 0);
      const auto parent = parent_array(n, t.edges, 0);
      const double base = oracle_raw(order, parent, t.types, t.extents);

      std::vector<std::size_t> child_count(n, 0);
      for (const auto& e : t.edges) ++child_count[e.first];

      // Every (edge, new parent) move that keeps all containers non-empty and
      // separates the runtimes by the required ratio.
      std::vector<std::pair<std::size_t, NodeIndex>> moves;
      std::vector<double> moved_runtime;
      for (std::size_t e = 0; e < t.edges.size(); ++e) {
        const auto [p, leaf] = t.edges[e];
        if (!is_leaf_type(t.types[leaf]) || child_count[p] < 2) continue;
        for (NodeIndex q = 0; q < n; ++q) {
          if (q == p || is_leaf_type(t.types[q])) continue;
          auto edges = t.edges;
          edges[e].first = q;
          auto new_parent = parent;
          new_parent[leaf] = q;
          const auto new_order = topological_order(n, edges, 0);
          const double r = oracle_raw(new_order, new_parent, t.types, t.extents);
          if (std::max(r, base) >= kMinPairRatio * std::min(r, base)) {
            moves.emplace_back(e, q);
            moved_runtime.push_back(r);
          }
        }
      }
      if (moves.empty()) continue;
      const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(moves.size()) - 1));

      auto features = compute_features(n, t.edges, t.types, t.extents, 0);
      RawTree rewired = t;
      rewired.edges[moves[pick].first].first = moves[pick].second;
      const double y_a = apply_noise(base, config.noise_std, rng);
      const double y_b = apply_noise(moved_runtime[pick], config.noise_std, rng);
      ds.graphs.push_back({ds.workloads[w].id, to_graph(t, features, y_a)});
      ds.graphs.push_back({ds.workloads[w].id, to_graph(rewired, std::move(features), y_b)});
      ++made;
    }
  }
  return ds;
}

}  // namespace astcost::synth
