#include "astcost/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "astcost/errors.hpp"
#include "astcost/format.hpp"
#include "astcost/model_spec.hpp"

namespace astcost::experiment {

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

namespace {
std::size_t model_rank(const std::string& label) {
  const auto& labels = models::ModelSpec::labels();
  return static_cast<std::size_t>(std::find(labels.begin(), labels.end(), label) - labels.begin());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}
}  // namespace

std::vector<SummaryRow> summarize(std::span<const RunResult> results) {
  struct Key {
    double fraction;
    std::size_t rank;
    std::string model;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> cells;
  for (const auto& r : results) {
    auto& [train, test] = cells[{r.fraction, model_rank(r.spec), r.spec}];
    train.push_back(r.train_l1);
    test.push_back(r.test_l1);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, losses] : cells) {
    rows.push_back({key.fraction, key.model, losses.first.size(), mean_stderr(losses.first), mean_stderr(losses.second)});
  }
  return rows;
}

std::string summary_csv(std::span<const SummaryRow> rows) {
  std::ostringstream os;
  os << "subset,model,train_loss,test_loss,train_stderr,test_stderr\n";
  for (const auto& r : rows) {
    os << format_double(r.fraction) << ',' << r.model << ',' << format_double(r.train.mean) << ','
       << format_double(r.test.mean) << ',' << format_double(r.train.std_error) << ','
       << format_double(r.test.std_error) << '\n';
  }
  return os.str();
}

std::string summary_table(std::span<const SummaryRow> rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s  %-6s  %-18s  %s\n", "subset", "model", "train loss", "test loss");
  os << line;
  for (const auto& r : rows) {
    char train[40], test[40];
    std::snprintf(train, sizeof train, "%.2f ± %.2f", r.train.mean, r.train.std_error);
    std::snprintf(test, sizeof test, "%.2f ± %.2f", r.test.mean, r.test.std_error);
    // "±" is two bytes wide in UTF-8 but one column on screen.
    std::snprintf(line, sizeof line, "%-8s  %-6s  %-19s  %s\n", format_double(r.fraction).c_str(),
                  r.model.c_str(), train, test);
    os << line;
  }
  return os.str();
}

std::string scatter_csv(const RunResult& result) {
  std::ostringstream os;
  os << "target,error\n";
  for (const auto& s : result.test_samples) {
    os << format_double(s.target) << ',' << format_double(s.prediction - s.target) << '\n';
  }
  return os.str();
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram: bins must be positive");
  std::vector<HistogramBin> out(bins);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins && hi > lo ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    ++out[std::min(b, bins - 1)].count;
  }
  return out;
}

std::string histogram_csv(std::span<const HistogramBin> bins) {
  std::ostringstream os;
  os << "bin_lo,bin_hi,count\n";
  for (const auto& b : bins) os << format_double(b.lo) << ',' << format_double(b.hi) << ',' << b.count << '\n';
  return os.str();
}

void write_report(const std::filesystem::path& out, std::span<const RunResult> results, std::span<const double> targets,
                  std::size_t bins) {
  if (results.empty()) throw std::invalid_argument("report: no run results");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw DataError("cannot create " + out.string() + ": " + ec.message());
  const auto rows = summarize(results);
  write_file(out / "summary.csv", summary_csv(rows));
  write_file(out / "summary.txt", summary_table(rows));
  for (const auto& r : results) write_file(out / ("scatter_" + run_stem(r) + ".csv"), scatter_csv(r));
  std::vector<double> hist_values(targets.begin(), targets.end());
  if (hist_values.empty()) {
    for (const auto& r : results)
      for (const auto& s : r.test_samples) hist_values.push_back(s.target);
  }
  write_file(out / "target_hist.csv", histogram_csv(histogram(hist_values, bins)));
}

}  // namespace astcost::experiment
