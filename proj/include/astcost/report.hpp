#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "astcost/trainer.hpp"

namespace astcost::experiment {

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n); 0 for n < 2
};
MeanStderr mean_stderr(std::span<const double> values);

struct SummaryRow {
  double fraction = 0.0;
  std::string model;
  std::size_t runs = 0;
  MeanStderr train;
  MeanStderr test;
};

/// One row per (fraction, model), fractions ascending, models in table
/// order. Pure function of `results`.
std::vector<SummaryRow> summarize(std::span<const RunResult> results);

/// Columns: subset, model, train_loss, test_loss, train_stderr, test_stderr.
std::string summary_csv(std::span<const SummaryRow> rows);
/// Aligned "mean ± stderr" table.
std::string summary_table(std::span<const SummaryRow> rows);
/// Columns: target, error (prediction - target).
std::string scatter_csv(const RunResult& result);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};
/// Equal-width bins over [min, max]; the maximum falls in the last bin.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins = 50);
std::string histogram_csv(std::span<const HistogramBin> bins);

/// Writes summary.csv, summary.txt, scatter_<stem>.csv per run and
/// target_hist.csv into `out`. The histogram covers `targets`, or every test
/// target of the results when `targets` is empty. Throws
/// std::invalid_argument on an empty result list.
void write_report(const std::filesystem::path& out, std::span<const RunResult> results,
                  std::span<const double> targets = {}, std::size_t bins = 50);

}  // namespace astcost::experiment
