#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "astcost/graph.hpp"

namespace astcost::experiment {

/// Training-set fractions of the sweep: 5% ... 100%.
const std::vector<double>& paper_fractions();

struct SplitPlan {
  std::vector<std::string> train_workloads;  // empty means the default six
  double validation_fraction = 0.2;
  double fraction = 1.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument.
  void validate() const;
  std::vector<std::string> resolved_train_workloads() const;
};

/// Graph indices into the dataset. `unused` holds training graphs dropped by
/// the fraction; the four lists partition the dataset.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::vector<std::size_t> unused;
};

/// Test is every graph of a non-training workload, in dataset order. The
/// rest is shuffled with the plan seed, the first floor(validation_fraction
/// x N) become validation, and the training list is cut to
/// ceil(fraction x |train|). Throws DataError when a named workload is absent
/// or no training graph remains.
Split make_split(const Dataset& dataset, const SplitPlan& plan);

/// ceil(fraction * n) that ignores floating-point noise in the product.
std::size_t subsample_count(double fraction, std::size_t n);

}  // namespace astcost::experiment
