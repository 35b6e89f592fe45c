#include "astcost/split.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "astcost/errors.hpp"
#include "astcost/rng.hpp"
#include "astcost/workloads.hpp"

namespace astcost::experiment {

const std::vector<double>& paper_fractions() {
  static const std::vector<double> f = {0.05, 0.10, 0.15, 0.20, 0.25, 0.50, 0.75, 1.0};
  return f;
}

void SplitPlan::validate() const {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation_fraction must be in (0, 1)");
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in (0, 1]");
}

std::vector<std::string> SplitPlan::resolved_train_workloads() const {
  return train_workloads.empty() ? default_train_workloads() : train_workloads;
}

std::size_t subsample_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

Split make_split(const Dataset& dataset, const SplitPlan& plan) {
  plan.validate();
  const auto names = plan.resolved_train_workloads();
  const std::set<std::string> given(names.begin(), names.end());
  for (const auto& id : given) {
    if (!dataset.find_workload(id)) throw DataError("training workload " + id + " not in dataset");
  }

  Split split;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < dataset.graphs.size(); ++i) {
    (given.contains(dataset.graphs[i].workload_id) ? pool : split.test).push_back(i);
  }
  Rng rng(derive_seed(plan.seed, hash_string("split")));
  rng.shuffle(pool);

  const auto n_val = static_cast<std::size_t>(std::floor(plan.validation_fraction * static_cast<double>(pool.size())));
  split.validation.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(pool.begin() + static_cast<std::ptrdiff_t>(n_val), pool.end());
  const std::size_t keep = subsample_count(plan.fraction, train.size());
  split.train.assign(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(keep));
  split.unused.assign(train.begin() + static_cast<std::ptrdiff_t>(keep), train.end());
  if (split.train.empty()) throw DataError("no training graphs left after subsampling");
  return split;
}

}  // namespace astcost::experiment
