#include "astcost/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "astcost/checkpoint.hpp"
#include "astcost/curves.hpp"
#include "astcost/dataset_io.hpp"
#include "astcost/errors.hpp"
#include "astcost/format.hpp"
#include "astcost/report.hpp"
#include "astcost/sweep.hpp"
#include "astcost/synth.hpp"

namespace astcost::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

/// Fills options the command line left unset from a flat JSON object. Keys
/// are long option names, with '_' and '-' interchangeable. Unknown keys
/// and invalid values throw CLI::ParseError, like their flag equivalents.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ConversionError(path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw CLI::ConversionError(path + " must hold a JSON object");
  auto scalar = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    name.erase(0, name.find_first_not_of('-'));
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = name == "config" ? nullptr : sub->get_option_no_throw("--" + name);
    if (opt == nullptr) throw CLI::ExtrasError(sub->get_name(), std::vector<std::string>{key});
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(scalar(v));
    } else {
      opt->add_result(scalar(value));
    }
    opt->run_callback();
  }
}

struct Options {
  std::string config;
  std::string data;
  std::string out;
  std::uint64_t seed = 0;

  // synth
  std::size_t graphs_per_workload = 64;
  std::size_t workload_count = 12;
  double noise_std = 0.0;
  bool rewired = false;

  // featurize
  std::size_t samples = features::kDefaultCurveSamples;

  // train / sweep
  std::string spec = "GCN1";
  double fraction = 1.0;
  std::vector<std::string> specs = models::ModelSpec::labels();
  std::vector<double> fractions = experiment::paper_fractions();
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::vector<std::string> train_workloads;
  double validation_fraction = 0.2;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t embedding_dim = 32;
  bool log_target = false;
  std::size_t jobs = 1;

  // evaluate / predict / report
  std::string checkpoint;
  std::vector<std::string> workloads;
  std::string results;
  std::size_t bins = 50;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--data", o.data, "Dataset directory");
  sub->add_option("--out", o.out, "Output path");
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_option("--config", o.config, "JSON file supplying any flag; command-line flags win");
}

void add_training(CLI::App* sub, Options& o) {
  sub->add_option("--train-workloads", o.train_workloads, "Given workloads (default C1 C2 C4 C8 C9 C12)")->delimiter(',');
  sub->add_option("--validation-fraction", o.validation_fraction, "Validation share of the given pool");
  sub->add_option("--epochs", o.epochs, "Maximum epochs");
  sub->add_option("--batch-size", o.batch_size, "Graphs per mini-batch");
  sub->add_option("--lr", o.learning_rate, "Base learning rate");
  sub->add_option("--embedding-dim", o.embedding_dim, "Node-type embedding width");
  sub->add_flag("--log-target", o.log_target, "Train on log runtime");
}

experiment::TrainOptions train_options(const Options& o) {
  experiment::TrainOptions t;
  t.optimizer.max_epochs = o.epochs;
  t.optimizer.learning_rate = o.learning_rate;
  t.optimizer.min_learning_rate = std::min(t.optimizer.min_learning_rate, o.learning_rate);
  t.batch_size = o.batch_size;
  t.log_target = o.log_target;
  return t;
}

experiment::SplitPlan split_plan(const Options& o) {
  experiment::SplitPlan p;
  p.train_workloads = o.train_workloads;
  p.validation_fraction = o.validation_fraction;
  p.fraction = o.fraction;
  p.seed = o.seed;
  return p;
}

ordered_json resolved(const std::string& command, const Options& o) {
  ordered_json j;
  j["command"] = command;
  j["seed"] = o.seed;
  if (command == "train" || command == "sweep") {
    j["spec"] = command == "train" ? ordered_json(o.spec) : ordered_json(o.specs);
    j["fractions"] = command == "train" ? std::vector<double>{o.fraction} : o.fractions;
    if (command == "sweep") j["seeds"] = o.seeds;
    j["train_workloads"] = split_plan(o).resolved_train_workloads();
    j["validation_fraction"] = o.validation_fraction;
    j["epochs"] = o.epochs;
    j["batch_size"] = o.batch_size;
    j["lr"] = o.learning_rate;
    j["embedding_dim"] = o.embedding_dim;
    j["log_target"] = o.log_target;
    if (command == "sweep") j["jobs"] = o.jobs;
  } else {
    j["spec"] = nullptr;
    j["fractions"] = nullptr;
  }
  if (command == "synth") {
    j["graphs_per_workload"] = o.graphs_per_workload;
    j["workloads"] = o.workload_count;
    j["noise_std"] = o.noise_std;
    j["rewired"] = o.rewired;
  }
  if (command == "featurize") j["samples"] = o.samples;
  if (!o.checkpoint.empty()) j["checkpoint"] = o.checkpoint;
  if (!o.results.empty()) j["results"] = o.results;
  if (!o.data.empty()) j["data"] = o.data;
  if (!o.out.empty()) j["out"] = o.out;
  return j;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create " + p.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

void emit(const std::string& target, const std::string& text, std::ostream& out) {
  if (target.empty() || target == "-") out << text;
  else write_text(target, text);
}

Dataset require_dataset(const Options& o) {
  if (o.data.empty()) throw DataError("--data is required");
  return load_dataset(o.data);
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw DataError("--out is required");
  synth::SynthConfig cfg;
  cfg.seed = o.seed;
  cfg.graphs_per_workload = o.graphs_per_workload;
  cfg.noise_std = o.noise_std;
  const auto defaults = synth::SynthConfig::default_workload_specs();
  cfg.workload_specs.clear();
  for (std::size_t i = 0; i < o.workload_count; ++i) cfg.workload_specs.push_back(defaults[i % defaults.size()]);
  const Dataset ds = o.rewired ? synth::make_rewired_pairs(cfg) : synth::generate(cfg);
  save_dataset(ds, o.out);
  out << "wrote " << ds.graphs.size() << " graphs in " << ds.workloads.size() << " workloads to " << o.out << "\n";
  return kOk;
}

int cmd_featurize(const Options& o, std::ostream& out) {
  const Dataset ds = require_dataset(o);
  std::ostringstream csv;
  csv << "workload_id,runtime";
  for (const char* curve : {"extent", "touch"})
    for (std::size_t i = 0; i < o.samples; ++i) csv << ',' << curve << '_' << i;
  csv << '\n';
  for (const auto& g : ds.graphs) {
    const auto c = features::extract_curves(g.graph, o.samples);
    csv << g.workload_id << ',' << format_double(g.graph.runtime());
    for (double v : c.values) csv << ',' << format_double(v);
    csv << '\n';
  }
  emit(o.out, csv.str(), out);
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw DataError("--out is required");
  const Dataset ds = require_dataset(o);
  const auto spec = models::ModelSpec::from_label(o.spec, o.embedding_dim);
  const auto split = experiment::make_split(ds, split_plan(o));
  auto outcome = experiment::train_model(spec, ds, split, train_options(o), o.seed, o.fraction);
  const auto stem = experiment::run_stem(outcome.result);
  ensure_dir(fs::path(o.out) / "results");
  ensure_dir(fs::path(o.out) / "checkpoints");
  experiment::save_run_result(fs::path(o.out) / "results" / (stem + ".json"), outcome.result);
  models::save_checkpoint(fs::path(o.out) / "checkpoints" / (stem + ".json"),
                          {std::move(outcome.model), o.seed, outcome.result.best_epoch, o.log_target});
  out << stem << ": train_l1=" << format_double(outcome.result.train_l1)
      << " val_l1=" << format_double(outcome.result.val_l1) << " test_l1=" << format_double(outcome.result.test_l1)
      << " epochs=" << outcome.result.epochs_run << "\n";
  return kOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw DataError("--out is required");
  const Dataset ds = require_dataset(o);
  experiment::SweepConfig cfg;
  cfg.specs = o.specs;
  cfg.fractions = o.fractions;
  cfg.seeds = o.seeds;
  cfg.plan = split_plan(o);
  cfg.options = train_options(o);
  cfg.embedding_dim = o.embedding_dim;
  cfg.jobs = o.jobs;
  const fs::path results_dir = fs::path(o.out) / "results";
  ensure_dir(results_dir);
  cfg.on_result = [&](const experiment::RunResult& r) {
    experiment::save_run_result(results_dir / (experiment::run_stem(r) + ".json"), r);
  };
  const auto results = experiment::sweep(ds, cfg);
  for (const auto& r : results) {
    out << experiment::run_stem(r) << ": train_l1=" << format_double(r.train_l1)
        << " test_l1=" << format_double(r.test_l1) << " epochs=" << r.epochs_run << "\n";
  }
  const auto targets = ds.runtimes();
  experiment::write_report(o.out, results, targets, o.bins);
  out << experiment::summary_table(experiment::summarize(results));
  return kOk;
}

std::vector<std::size_t> selected_indices(const Dataset& ds, const std::vector<std::string>& workloads) {
  for (const auto& w : workloads) {
    if (!ds.find_workload(w)) throw DataError("workload " + w + " not in dataset");
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    if (workloads.empty() || std::find(workloads.begin(), workloads.end(), ds.graphs[i].workload_id) != workloads.end()) {
      idx.push_back(i);
    }
  }
  return idx;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  if (o.checkpoint.empty()) throw DataError("--checkpoint is required");
  const auto ckpt = models::load_checkpoint(o.checkpoint);
  const Dataset ds = require_dataset(o);
  const auto idx = selected_indices(ds, o.workloads);
  const auto pred = experiment::predict_indices(ckpt.model, ds, idx, ckpt.log_target);
  ordered_json j;
  std::map<std::string, std::pair<double, std::size_t>> per;
  double total = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& g = ds.graphs[idx[i]];
    const double e = std::abs(pred[i] - g.graph.runtime());
    total += e;
    per[g.workload_id].first += e;
    ++per[g.workload_id].second;
  }
  j["count"] = idx.size();
  j["l1"] = idx.empty() ? 0.0 : total / static_cast<double>(idx.size());
  ordered_json pw = ordered_json::object();
  for (const auto& w : ds.workloads) {
    auto it = per.find(w.id);
    if (it == per.end()) continue;
    pw[w.id] = {{"count", it->second.second}, {"l1", it->second.first / static_cast<double>(it->second.second)}};
  }
  j["per_workload"] = std::move(pw);
  emit(o.out, j.dump(2) + "\n", out);
  return kOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  if (o.checkpoint.empty()) throw DataError("--checkpoint is required");
  const auto ckpt = models::load_checkpoint(o.checkpoint);
  const Dataset ds = require_dataset(o);
  const auto idx = selected_indices(ds, o.workloads);
  const auto pred = experiment::predict_indices(ckpt.model, ds, idx, ckpt.log_target);
  std::ostringstream csv;
  csv << "workload_id,target,prediction\n";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& g = ds.graphs[idx[i]];
    csv << g.workload_id << ',' << format_double(g.graph.runtime()) << ',' << format_double(pred[i]) << '\n';
  }
  emit(o.out, csv.str(), out);
  return kOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw DataError("--out is required");
  const fs::path dir = o.results.empty() ? fs::path(o.out) / "results" : fs::path(o.results);
  if (!fs::is_directory(dir)) throw DataError("results directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<experiment::RunResult> results;
  for (const auto& f : files) results.push_back(experiment::load_run_result(f));
  if (results.empty()) throw DataError("no run results in " + dir.string());
  std::vector<double> targets;
  if (!o.data.empty()) targets = load_dataset(o.data).runtimes();
  experiment::write_report(o.out, results, targets, o.bins);
  out << experiment::summary_table(experiment::summarize(results));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Runtime surrogates for tensor-program ASTs", "astcost"};
  app.require_subcommand(1);
  Options o;

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic AST dataset");
  add_common(synth_cmd, o);
  synth_cmd->add_option("--graphs-per-workload", o.graphs_per_workload, "Graphs (or pairs) per workload");
  synth_cmd->add_option("--workloads", o.workload_count, "Number of workloads")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--noise-std", o.noise_std, "Log-normal runtime noise");
  synth_cmd->add_flag("--rewired", o.rewired, "Emit rewired pairs instead");

  auto* featurize_cmd = app.add_subcommand("featurize", "Write curve features as CSV");
  add_common(featurize_cmd, o);
  featurize_cmd->add_option("--samples", o.samples, "Samples per curve")->check(CLI::PositiveNumber);

  auto* train_cmd = app.add_subcommand("train", "Train one model on one fraction and seed");
  add_common(train_cmd, o);
  add_training(train_cmd, o);
  train_cmd->add_option("--spec", o.spec, "Model label")->check(CLI::IsMember(models::ModelSpec::labels()));
  train_cmd->add_option("--fraction", o.fraction, "Training-set fraction");

  auto* sweep_cmd = app.add_subcommand("sweep", "Train every (spec, fraction, seed) cell and report");
  add_common(sweep_cmd, o);
  add_training(sweep_cmd, o);
  sweep_cmd->add_option("--specs", o.specs, "Model labels")->delimiter(',')->check(CLI::IsMember(models::ModelSpec::labels()));
  sweep_cmd->add_option("--fractions", o.fractions, "Training-set fractions")->delimiter(',');
  sweep_cmd->add_option("--seeds", o.seeds, "Seeds")->delimiter(',');
  sweep_cmd->add_option("--jobs", o.jobs, "Concurrent cells")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--bins", o.bins, "Target histogram bins")->check(CLI::PositiveNumber);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "ℓ1 of a checkpoint on a dataset");
  add_common(evaluate_cmd, o);
  evaluate_cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint file");
  evaluate_cmd->add_option("--workloads", o.workloads, "Restrict to these workloads")->delimiter(',');

  auto* predict_cmd = app.add_subcommand("predict", "Per-graph predictions as CSV");
  add_common(predict_cmd, o);
  predict_cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint file");
  predict_cmd->add_option("--workloads", o.workloads, "Restrict to these workloads")->delimiter(',');

  auto* report_cmd = app.add_subcommand("report", "Summaries, scatter and histogram CSVs from run results");
  add_common(report_cmd, o);
  report_cmd->add_option("--results", o.results, "Directory of run-result JSON files (default <out>/results)");
  report_cmd->add_option("--bins", o.bins, "Target histogram bins")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (!o.config.empty()) apply_config(app.get_subcommands().front(), o.config);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kUsageError;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    out << resolved(name, o).dump() << "\n";
    if (name == "synth") return cmd_synth(o, out);
    if (name == "featurize") return cmd_featurize(o, out);
    if (name == "train") return cmd_train(o, out);
    if (name == "sweep") return cmd_sweep(o, out);
    if (name == "evaluate") return cmd_evaluate(o, out);
    if (name == "predict") return cmd_predict(o, out);
    return cmd_report(o, out);
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, out, err);
}

}  // namespace astcost::cli
