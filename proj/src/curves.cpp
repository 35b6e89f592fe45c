#include "astcost/curves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "astcost/errors.hpp"

namespace astcost::features {

std::vector<double> resample_sorted(const std::vector<double>& sorted, std::size_t samples) {
  std::vector<double> out(samples, 0.0);
  if (sorted.empty()) return out;
  if (sorted.size() == 1) {
    std::fill(out.begin(), out.end(), sorted.front());
    return out;
  }
  const double last = static_cast<double>(sorted.size() - 1);
  for (std::size_t j = 0; j < samples; ++j) {
    const double q = samples == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(samples - 1);
    const double pos = q * last;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    out[j] = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }
  return out;
}

CurveFeatures extract_curves(const AstGraph& graph, std::size_t samples) {
  if (samples == 0) throw std::invalid_argument("extract_curves: samples must be positive");
  if (graph.feature_dim() <= kSubtreeSizeColumn) {
    throw DataError("extract_curves: graph needs at least " + std::to_string(kSubtreeSizeColumn + 1) +
                    " feature columns");
  }
  const std::size_t n = graph.node_count();
  std::vector<double> extent_run(n, 1.0), touch_run(n, 1.0);
  std::vector<double> extent_pool, touch_pool;
  const auto& parent = graph.parents();
  const auto& types = graph.node_types();
  for (NodeIndex v : graph.topological_order()) {
    if (!graph.is_root(v)) {
      extent_run[v] = extent_run[parent[v]];
      touch_run[v] = touch_run[parent[v]];
    }
    if (types[v] != kLoopType) continue;
    const double extent = graph.feature(v, kExtentColumn);
    extent_run[v] *= extent;
    touch_run[v] *= graph.feature(v, kSubtreeSizeColumn) * extent;
    extent_pool.push_back(extent_run[v]);
    touch_pool.push_back(touch_run[v]);
  }
  std::sort(extent_pool.begin(), extent_pool.end());
  std::sort(touch_pool.begin(), touch_pool.end());

  CurveFeatures out;
  out.samples = samples;
  out.values = resample_sorted(extent_pool, samples);
  const auto touch = resample_sorted(touch_pool, samples);
  out.values.insert(out.values.end(), touch.begin(), touch.end());
  for (double& v : out.values) {
    v = std::log1p(v);
    if (!std::isfinite(v)) throw DataError("extract_curves: non-finite curve value");
  }
  return out;
}

}  // namespace astcost::features
