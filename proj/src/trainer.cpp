#include "astcost/trainer.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <memory>

#include "astcost/errors.hpp"
#include "astcost/format.hpp"
#include "astcost/layers.hpp"
#include "astcost/rng.hpp"

namespace astcost::experiment {

using models::ModelInput;
using models::Surrogate;
using nn::Tensor;

namespace {

/// Model inputs for a set of graphs; curve features are computed once.
class InputCache {
 public:
  InputCache(const Surrogate& model, const Dataset& dataset) : model_(model), dataset_(dataset) {
    if (model.spec().input == models::InputKind::kCurve) curves_.resize(dataset.graphs.size());
  }

  ModelInput at(std::size_t index) {
    const AstGraph& g = dataset_.graphs[index].graph;
    if (model_.spec().input == models::InputKind::kGraph) return &g;
    auto& slot = curves_[index];
    if (!slot) slot = std::make_unique<features::CurveFeatures>(features::extract_curves(g, model_.dims().curve_samples));
    return slot.get();
  }

 private:
  const Surrogate& model_;
  const Dataset& dataset_;
  std::vector<std::unique_ptr<features::CurveFeatures>> curves_;
};

double to_model_target(double runtime, bool log_target) { return log_target ? std::log(runtime) : runtime; }
double from_model_output(double out, bool log_target) { return log_target ? std::exp(out) : out; }

std::vector<double> predict_cached(const Surrogate& model, InputCache& cache, const std::vector<std::size_t>& indices,
                                   bool log_target) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(from_model_output(models::predict(model, cache.at(i)), log_target));
  return out;
}

double monitored_loss(const Surrogate& model, InputCache& cache, const Dataset& ds,
                      const std::vector<std::size_t>& indices, const TrainOptions& options) {
  std::vector<double> pred, target;
  for (std::size_t i : indices) {
    pred.push_back(models::predict(model, cache.at(i)));
    target.push_back(to_model_target(ds.graphs[i].graph.runtime(), options.log_target));
  }
  return nn::huber_loss(pred, target, options.huber_delta);
}

double l1_over(const std::vector<double>& pred, const Dataset& ds, const std::vector<std::size_t>& indices) {
  if (indices.empty()) return 0.0;
  std::vector<double> target;
  for (std::size_t i : indices) target.push_back(ds.graphs[i].graph.runtime());
  return nn::l1_loss(pred, target);
}

std::string cell_name(const std::string& spec, double fraction, std::uint64_t seed) {
  return "spec " + spec + " fraction " + format_double(fraction) + " seed " + std::to_string(seed);
}

}  // namespace

std::string run_stem(const std::string& spec, double fraction, std::uint64_t seed) {
  return spec + "_" + format_double(fraction) + "_" + std::to_string(seed);
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& spec, double fraction) {
  return derive_seed(derive_seed(seed, hash_string(spec)), std::bit_cast<std::uint64_t>(fraction));
}

TrainOutcome train_model(const models::ModelSpec& spec, const Dataset& dataset, const Split& split,
                         const TrainOptions& options, std::uint64_t seed, double fraction) {
  options.optimizer.validate();
  if (split.train.empty()) throw DataError("train_model: empty training split");
  if (options.batch_size == 0) throw std::invalid_argument("batch_size must be positive");

  const std::uint64_t init_seed = cell_seed(seed, spec.label, fraction);
  Surrogate model(spec, {dataset.feature_dim, dataset.type_vocab_size, options.curve_samples}, init_seed);
  auto params = model.parameters();
  for (nn::Parameter* p : params) p->zero_grad();
  InputCache cache(model, dataset);
  Rng order_rng(derive_seed(init_seed, hash_string("batches")));

  const auto& monitor = split.validation.empty() ? split.train : split.validation;
  nn::PlateauScheduler scheduler(options.optimizer);
  double lr = options.optimizer.learning_rate;

  RunResult result;
  result.spec = spec.label;
  result.fraction = fraction;
  result.seed = seed;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_values;
  for (const nn::Parameter* p : params) best_values.push_back(p->value);

  std::vector<std::size_t> order = split.train;
  std::size_t epoch = 0;
  try {
    while (epoch < options.optimizer.max_epochs) {
      ++epoch;
      order_rng.shuffle(order);
      for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
        const std::size_t end = std::min(order.size(), start + options.batch_size);
        nn::Tape tape;
        std::vector<nn::Var> preds;
        std::vector<double> targets;
        for (std::size_t b = start; b < end; ++b) {
          preds.push_back(models::forward(tape, model, cache.at(order[b])));
          targets.push_back(to_model_target(dataset.graphs[order[b]].graph.runtime(), options.log_target));
        }
        const nn::Var stacked = nn::stack_rows(tape, preds);
        const nn::Var loss = nn::huber_loss(tape, stacked, Tensor::vector(std::move(targets)), options.huber_delta);
        tape.backward(loss);
        nn::adam_step(params, options.optimizer, lr);
        for (nn::Parameter* p : params) p->zero_grad();
      }

      const double val = monitored_loss(model, cache, dataset, monitor, options);
      if (!std::isfinite(val)) throw NumericError("non-finite validation loss");
      result.val_history.push_back(val);
      if (val < best) {
        best = val;
        result.best_epoch = epoch;
        for (std::size_t i = 0; i < params.size(); ++i) best_values[i] = params[i]->value;
      }
      lr = scheduler.step(val);
      if (nn::early_stop(result.val_history, options.optimizer)) break;
    }
  } catch (const NumericError& e) {
    throw DivergenceError(cell_name(spec.label, fraction, seed) + " diverged at epoch " + std::to_string(epoch) +
                          ": " + e.what());
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  result.epochs_run = epoch;

  const auto train_pred = predict_cached(model, cache, split.train, options.log_target);
  const auto val_pred = predict_cached(model, cache, split.validation, options.log_target);
  const auto test_pred = predict_cached(model, cache, split.test, options.log_target);
  result.train_l1 = l1_over(train_pred, dataset, split.train);
  result.val_l1 = l1_over(val_pred, dataset, split.validation);
  result.test_l1 = l1_over(test_pred, dataset, split.test);
  result.train_count = split.train.size();
  result.val_count = split.validation.size();
  result.test_count = split.test.size();
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    result.test_samples.push_back({dataset.graphs[split.test[i]].graph.runtime(), test_pred[i]});
  }
  return {std::move(model), std::move(result)};
}

std::vector<double> predict_indices(const Surrogate& model, const Dataset& dataset,
                                    const std::vector<std::size_t>& indices, bool log_target) {
  InputCache cache(model, dataset);
  return predict_cached(model, cache, indices, log_target);
}

double evaluate_l1(const Surrogate& model, const Dataset& dataset, const std::vector<std::size_t>& indices,
                   bool log_target) {
  return l1_over(predict_indices(model, dataset, indices, log_target), dataset, indices);
}

void save_run_result(const std::filesystem::path& path, const RunResult& r) {
  nlohmann::ordered_json j;
  j["spec"] = r.spec;
  j["fraction"] = r.fraction;
  j["seed"] = r.seed;
  j["train_l1"] = r.train_l1;
  j["val_l1"] = r.val_l1;
  j["test_l1"] = r.test_l1;
  j["epochs_run"] = r.epochs_run;
  j["best_epoch"] = r.best_epoch;
  j["train_count"] = r.train_count;
  j["val_count"] = r.val_count;
  j["test_count"] = r.test_count;
  j["val_history"] = r.val_history;
  auto samples = nlohmann::ordered_json::array();
  for (const auto& s : r.test_samples) samples.push_back({s.target, s.prediction});
  j["test_samples"] = std::move(samples);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump() << '\n';
}

RunResult load_run_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing run result " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    RunResult r;
    r.spec = j.at("spec").get<std::string>();
    r.fraction = j.at("fraction").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.train_l1 = j.at("train_l1").get<double>();
    r.val_l1 = j.at("val_l1").get<double>();
    r.test_l1 = j.at("test_l1").get<double>();
    r.epochs_run = j.at("epochs_run").get<std::size_t>();
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.train_count = j.value("train_count", std::size_t{0});
    r.val_count = j.value("val_count", std::size_t{0});
    r.test_count = j.value("test_count", std::size_t{0});
    r.val_history = j.value("val_history", std::vector<double>{});
    for (const auto& s : j.at("test_samples")) r.test_samples.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed run result " + path.string() + ": " + e.what());
  }
}

}  // namespace astcost::experiment
