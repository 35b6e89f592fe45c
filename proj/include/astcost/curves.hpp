#pragma once

#include <cstddef>
#include <vector>

#include "astcost/graph.hpp"

namespace astcost::features {

inline constexpr std::size_t kDefaultCurveSamples = 20;
inline constexpr std::size_t kExtentColumn = 0;
inline constexpr std::size_t kSubtreeSizeColumn = 5;
inline constexpr std::uint32_t kLoopType = 1;

/// Whole-graph loop-context summary: the extent curve followed by the
/// touched-memory curve, `samples` values each, log1p-compressed.
struct CurveFeatures {
  std::size_t samples = kDefaultCurveSamples;
  std::vector<double> values;  // 2 * samples

  std::size_t width() const { return values.size(); }
  friend bool operator==(const CurveFeatures&, const CurveFeatures&) = default;
};

/// For every loop node (type kLoopType), in parent-first order, records the
/// running product of loop extents from the root down to and including it,
/// and the running product of (subtree size x extent). Each pool is sorted
/// and resampled at `samples` evenly spaced quantiles by linear
/// interpolation; an empty pool yields zeros. Throws std::invalid_argument
/// when samples is 0 and DataError when the graph lacks the extent or
/// subtree-size columns.
CurveFeatures extract_curves(const AstGraph& graph, std::size_t samples = kDefaultCurveSamples);

/// Quantile resampling used by extract_curves, exposed for testing.
std::vector<double> resample_sorted(const std::vector<double>& sorted, std::size_t samples);

}  // namespace astcost::features
