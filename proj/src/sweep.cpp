#include "astcost/sweep.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "astcost/errors.hpp"
#include "astcost/format.hpp"

namespace astcost::experiment {

TrainOutcome run_cell(const Dataset& dataset, const SweepConfig& config, const std::string& spec, double fraction,
                      std::uint64_t seed) {
  SplitPlan plan = config.plan;
  plan.fraction = fraction;
  plan.seed = seed;
  const Split split = make_split(dataset, plan);
  return train_model(models::ModelSpec::from_label(spec, config.embedding_dim), dataset, split, config.options, seed,
                     fraction);
}

namespace {

struct Cell {
  std::string spec;
  double fraction;
  std::uint64_t seed;
};

[[noreturn]] void rethrow_with_cell(const Cell& c) {
  const std::string where = "sweep cell (" + c.spec + ", " + format_double(c.fraction) + ", " +
                            std::to_string(c.seed) + "): ";
  try {
    throw;
  } catch (const DivergenceError& e) {
    throw DivergenceError(where + e.what());
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(where + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(where + e.what());
  }
}

}  // namespace

std::vector<RunResult> sweep(const Dataset& dataset, const SweepConfig& config) {
  std::vector<Cell> cells;
  for (const auto& s : config.specs) {
    models::ModelSpec::from_label(s);  // reject unknown labels before any work
    for (double f : config.fractions)
      for (auto seed : config.seeds) cells.push_back({s, f, seed});
  }
  std::vector<RunResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;

  auto worker = [&] {
    while (!failed) {
      const std::size_t i = next++;
      if (i >= cells.size()) return;
      try {
        try {
          results[i] = run_cell(dataset, config, cells[i].spec, cells[i].fraction, cells[i].seed).result;
        } catch (...) {
          rethrow_with_cell(cells[i]);
        }
        std::lock_guard lock(mu);
        if (config.on_result) config.on_result(results[i]);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, cells.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace astcost::experiment
