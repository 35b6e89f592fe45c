#pragma once

#include <cstdint>
#include <vector>

#include "astcost/graph.hpp"

namespace astcost::synth {

/// Node type vocabulary of generated ASTs.
enum NodeType : std::uint32_t {
  kRoot = 0,
  kFor = 1,
  kVectorize = 2,
  kUnroll = 3,
  kCompute = 4,
  kLoad = 5,
  kStore = 6,
};
inline constexpr std::size_t kTypeVocabSize = 7;

/// Per-node feature columns of generated graphs.
enum FeatureColumn : std::size_t {
  kLoopExtent = 0,     // extent for `for`, 1 otherwise
  kDepth = 1,          // root is 0
  kLogAncestorExtent,  // log2 of the product of ancestor `for` extents
  kIsVectorized,       // node or an ancestor is a vectorize node
  kIsUnrolled,         // node or an ancestor is an unroll node
  kSubtreeSize,        // node count of the subtree, self included
};
inline constexpr std::size_t kFeatureDim = 6;

struct WorkloadShape {
  int max_depth = 4;  // 2..8
  int branching = 2;  // 1..4
};

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t graphs_per_workload = 64;
  std::vector<WorkloadShape> workload_specs = default_workload_specs();
  /// Standard deviation of the log-normal multiplicative noise; must be < 0.5.
  double noise_std = 0.0;

  /// Twelve shapes, one per ResNet18 workload row.
  static std::vector<WorkloadShape> default_workload_specs();

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Oracle cost weights.
inline constexpr double kComputeWeight = 1.0;
inline constexpr double kLoadWeight = 0.4;
inline constexpr double kStoreWeight = 0.6;
inline constexpr double kVectorizeDivisor = 4.0;
inline constexpr double kUnrollFactor = 0.9;
inline constexpr double kRuntimeScale = 1e-4;  // milliseconds per unit cost

/// Analytic runtime in milliseconds. Every compute/load/store node costs its
/// weight times the product of the extents of its `for` ancestors, divided by
/// 4 per vectorize ancestor and scaled by 0.9 per unroll ancestor. Extents are
/// read from the kLoopExtent column. Throws DataError on unknown node types.
double oracle_runtime(const AstGraph& graph);

/// Recomputes the synth feature schema from structure and per-node extents.
std::vector<double> compute_features(std::size_t node_count, std::span<const Edge> edges,
                                     std::span<const std::uint32_t> types,
                                     std::span<const double> extents, NodeIndex root);

/// Workloads are labelled C1, C2, ... and carry the matching ResNet18 row
/// (config_count replaced by graphs_per_workload). Each workload draws from
/// its own sub-seed derived from (seed, workload index).
Dataset generate(const SynthConfig& config);

/// graphs_per_workload pairs per workload, stored consecutively. Both members
/// of a pair share node count, feature rows, and node types index-for-index;
/// only the parent of one leaf differs, and their oracle runtimes differ by at
/// least a factor of two.
Dataset make_rewired_pairs(const SynthConfig& config);

inline constexpr double kMinPairRatio = 2.0;

}  // namespace astcost::synth
