#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "astcost/graph.hpp"
#include "astcost/optim.hpp"
#include "astcost/split.hpp"
#include "astcost/surrogate.hpp"

namespace astcost::experiment {

struct TrainOptions {
  nn::OptimizerConfig optimizer;
  std::size_t batch_size = 32;
  double huber_delta = 1.0;
  /// Train on log(runtime); predictions are mapped back before ℓ1 is taken.
  bool log_target = false;
  std::size_t curve_samples = features::kDefaultCurveSamples;
};

struct SamplePair {
  double target = 0.0;
  double prediction = 0.0;

  friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

struct RunResult {
  std::string spec;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  double train_l1 = 0.0;
  double val_l1 = 0.0;
  double test_l1 = 0.0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::size_t train_count = 0;
  std::size_t val_count = 0;
  std::size_t test_count = 0;
  /// Monitored (Huber) validation loss per epoch.
  std::vector<double> val_history;
  std::vector<SamplePair> test_samples;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

std::string run_stem(const std::string& spec, double fraction, std::uint64_t seed);
inline std::string run_stem(const RunResult& r) { return run_stem(r.spec, r.fraction, r.seed); }

void save_run_result(const std::filesystem::path& path, const RunResult& result);
RunResult load_run_result(const std::filesystem::path& path);

struct TrainOutcome {
  models::Surrogate model;
  RunResult result;
};

/// Seed for weight init and batch order of one (seed, spec, fraction) cell.
std::uint64_t cell_seed(std::uint64_t seed, const std::string& spec, double fraction);

/// Mini-batch Adam on the mean Huber loss with plateau decay and early
/// stopping, both driven by the validation Huber loss (the training loss when
/// the validation split is empty). The weights of the best validation epoch
/// are restored before ℓ1 is measured on every split. Throws DivergenceError
/// with the cell and epoch on any non-finite value.
TrainOutcome train_model(const models::ModelSpec& spec, const Dataset& dataset, const Split& split,
                         const TrainOptions& options, std::uint64_t seed, double fraction);

/// ℓ1 of the model over `indices`; 0 for an empty list.
double evaluate_l1(const models::Surrogate& model, const Dataset& dataset, const std::vector<std::size_t>& indices,
                   bool log_target = false);

/// Model predictions for `indices` in order, in milliseconds.
std::vector<double> predict_indices(const models::Surrogate& model, const Dataset& dataset,
                                    const std::vector<std::size_t>& indices, bool log_target = false);

}  // namespace astcost::experiment
