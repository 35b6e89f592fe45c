#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "astcost/trainer.hpp"

namespace astcost::experiment {

struct SweepConfig {
  std::vector<std::string> specs = models::ModelSpec::labels();
  std::vector<double> fractions = paper_fractions();
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  /// Fraction and seed are overwritten per cell.
  SplitPlan plan;
  TrainOptions options;
  std::size_t embedding_dim = 32;
  /// Upper bound on concurrently trained cells.
  std::size_t jobs = 1;
  /// Called once per finished cell, serialized; may be empty.
  std::function<void(const RunResult&)> on_result;
};

/// Trains every (spec, fraction, seed) cell. Results come back ordered by
/// spec, then fraction, then seed, whatever the scheduling. A failing cell
/// is rethrown with its identity prefixed to the message.
std::vector<RunResult> sweep(const Dataset& dataset, const SweepConfig& config);

/// One cell, exactly as sweep() runs it.
TrainOutcome run_cell(const Dataset& dataset, const SweepConfig& config, const std::string& spec, double fraction,
                      std::uint64_t seed);

}  // namespace astcost::experiment
