#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "astcost/checkpoint.hpp"
#include "astcost/curves.hpp"
#include "astcost/dataset_io.hpp"
#include "astcost/errors.hpp"
#include "astcost/report.hpp"
#include "astcost/split.hpp"
#include "astcost/surrogate.hpp"
#include "astcost/sweep.hpp"
#include "astcost/synth.hpp"
#include "astcost/trainer.hpp"
#include "astcost/workloads.hpp"

namespace py = pybind11;
using namespace astcost;
using experiment::RunResult;
using models::ModelSpec;
using models::Surrogate;

namespace {

double predict_graph(const Surrogate& model, const AstGraph& graph) {
  if (model.spec().input == models::InputKind::kCurve) {
    return models::predict(model, features::extract_curves(graph, model.dims().curve_samples));
  }
  return models::predict(model, graph);
}

}  // namespace

PYBIND11_MODULE(_astcost, m) {
  m.doc() = "Runtime prediction for tensor-program ASTs";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);

  py::class_<AstGraph>(m, "AstGraph")
      .def(py::init([](std::size_t n, std::vector<Edge> edges, std::vector<std::vector<double>> rows,
                       std::vector<std::uint32_t> types, double runtime, NodeIndex root) {
             if (rows.size() != n) throw DataError("expected one feature row per node");
             const std::size_t d = n == 0 ? 0 : rows[0].size();
             std::vector<double> flat;
             for (const auto& r : rows) {
               if (r.size() != d) throw DataError("feature rows differ in width");
               flat.insert(flat.end(), r.begin(), r.end());
             }
             return AstGraph(n, std::move(edges), d, std::move(flat), std::move(types), runtime, root);
           }),
           py::arg("node_count"), py::arg("edges"), py::arg("features"), py::arg("node_types"),
           py::arg("runtime"), py::arg("root") = 0)
      .def_property_readonly("node_count", &AstGraph::node_count)
      .def_property_readonly("feature_dim", &AstGraph::feature_dim)
      .def_property_readonly("root", &AstGraph::root)
      .def_property_readonly("runtime", &AstGraph::runtime)
      .def_property_readonly("edges", &AstGraph::edges)
      .def_property_readonly("node_types", &AstGraph::node_types)
      .def_property_readonly("parents", &AstGraph::parents)
      .def_property_readonly("topological_order", &AstGraph::topological_order)
      .def_property_readonly("features",
                             [](const AstGraph& g) {
                               std::vector<std::vector<double>> rows;
                               for (NodeIndex v = 0; v < g.node_count(); ++v) {
                                 auto r = g.feature_row(v);
                                 rows.emplace_back(r.begin(), r.end());
                               }
                               return rows;
                             })
      .def("children", [](const AstGraph& g, NodeIndex v) { return children(g, v); })
      .def("with_runtime", &AstGraph::with_runtime)
      .def(py::self == py::self)
      .def("__repr__", [](const AstGraph& g) {
        return "<AstGraph nodes=" + std::to_string(g.node_count()) + " runtime=" + std::to_string(g.runtime()) + ">";
      });

  py::class_<WorkloadMeta>(m, "WorkloadMeta")
      .def_readonly("id", &WorkloadMeta::id)
      .def_readonly("height", &WorkloadMeta::height)
      .def_readonly("width", &WorkloadMeta::width)
      .def_readonly("c_in", &WorkloadMeta::c_in)
      .def_readonly("c_out", &WorkloadMeta::c_out)
      .def_readonly("kernel", &WorkloadMeta::kernel)
      .def_readonly("stride", &WorkloadMeta::stride)
      .def_readonly("padding", &WorkloadMeta::padding)
      .def_readonly("dilation", &WorkloadMeta::dilation)
      .def_readonly("config_count", &WorkloadMeta::config_count);

  py::class_<LabeledGraph>(m, "LabeledGraph")
      .def_readonly("workload_id", &LabeledGraph::workload_id)
      .def_readonly("graph", &LabeledGraph::graph);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("workloads", &Dataset::workloads)
      .def_readonly("graphs", &Dataset::graphs)
      .def_readonly("feature_dim", &Dataset::feature_dim)
      .def_readonly("type_vocab_size", &Dataset::type_vocab_size)
      .def("runtimes", &Dataset::runtimes)
      .def("validate", &Dataset::validate)
      .def("__len__", [](const Dataset& d) { return d.graphs.size(); })
      .def(py::self == py::self);

  m.def("resnet18_workloads", &resnet18_workloads, py::return_value_policy::copy);
  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));

  py::class_<synth::SynthConfig>(m, "SynthConfig")
      .def(py::init([](std::uint64_t seed, std::size_t graphs_per_workload,
                       std::optional<std::vector<std::pair<int, int>>> shapes, double noise_std) {
             synth::SynthConfig c;
             c.seed = seed;
             c.graphs_per_workload = graphs_per_workload;
             c.noise_std = noise_std;
             if (shapes) {
               c.workload_specs.clear();
               for (auto [d, b] : *shapes) c.workload_specs.push_back({d, b});
             }
             return c;
           }),
           py::arg("seed") = 0, py::arg("graphs_per_workload") = 64, py::arg("workload_specs") = py::none(),
           py::arg("noise_std") = 0.0)
      .def_readwrite("seed", &synth::SynthConfig::seed)
      .def_readwrite("graphs_per_workload", &synth::SynthConfig::graphs_per_workload)
      .def_readwrite("noise_std", &synth::SynthConfig::noise_std)
      .def_property_readonly("workload_specs", [](const synth::SynthConfig& c) {
        std::vector<std::pair<int, int>> out;
        for (const auto& s : c.workload_specs) out.emplace_back(s.max_depth, s.branching);
        return out;
      });

  m.def("generate", &synth::generate, py::arg("config"));
  m.def("make_rewired_pairs", &synth::make_rewired_pairs, py::arg("config"));
  m.def("oracle_runtime", &synth::oracle_runtime, py::arg("graph"));
  m.def(
      "extract_curves",
      [](const AstGraph& g, std::size_t samples) { return features::extract_curves(g, samples).values; },
      py::arg("graph"), py::arg("samples") = features::kDefaultCurveSamples);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init(&ModelSpec::from_label), py::arg("label"), py::arg("embedding_dim") = 32)
      .def_readonly("label", &ModelSpec::label)
      .def_readonly("encoder_widths", &ModelSpec::encoder_widths)
      .def_readonly("propagation_widths", &ModelSpec::propagation_widths)
      .def_readonly("head_widths", &ModelSpec::head_widths)
      .def_readonly("embedding_dim", &ModelSpec::embedding_dim)
      .def_property_readonly("uses_curves",
                             [](const ModelSpec& s) { return s.input == models::InputKind::kCurve; })
      .def(py::self == py::self);
  m.def("model_labels", &ModelSpec::labels, py::return_value_policy::copy);

  py::class_<Surrogate>(m, "Surrogate")
      .def(py::init([](const ModelSpec& spec, std::size_t feature_dim, std::size_t type_vocab_size,
                       std::size_t curve_samples, std::uint64_t seed) {
             return Surrogate(spec, {feature_dim, type_vocab_size, curve_samples}, seed);
           }),
           py::arg("spec"), py::arg("feature_dim") = synth::kFeatureDim,
           py::arg("type_vocab_size") = synth::kTypeVocabSize,
           py::arg("curve_samples") = features::kDefaultCurveSamples, py::arg("seed") = 0)
      .def_property_readonly("spec", &Surrogate::spec)
      .def_property_readonly("parameter_count", &Surrogate::parameter_count)
      .def("predict", &predict_graph, py::arg("graph"));
  m.def("predict", &predict_graph, py::arg("model"), py::arg("graph"));

  py::class_<models::Checkpoint>(m, "Checkpoint")
      .def(py::init([](const Surrogate& model, std::uint64_t seed, std::size_t epoch, bool log_target) {
             return models::Checkpoint{model, seed, epoch, log_target};
           }),
           py::arg("model"), py::arg("seed") = 0, py::arg("epoch") = 0, py::arg("log_target") = false)
      .def_readonly("model", &models::Checkpoint::model)
      .def_readonly("seed", &models::Checkpoint::seed)
      .def_readonly("epoch", &models::Checkpoint::epoch)
      .def_readonly("log_target", &models::Checkpoint::log_target);
  m.def("save_checkpoint", &models::save_checkpoint, py::arg("path"), py::arg("checkpoint"));
  m.def("load_checkpoint", &models::load_checkpoint, py::arg("path"));

  py::class_<experiment::SplitPlan>(m, "SplitPlan")
      .def(py::init([](std::vector<std::string> train_workloads, double validation_fraction, double fraction,
                       std::uint64_t seed) {
             return experiment::SplitPlan{std::move(train_workloads), validation_fraction, fraction, seed};
           }),
           py::arg("train_workloads") = std::vector<std::string>{}, py::arg("validation_fraction") = 0.2,
           py::arg("fraction") = 1.0, py::arg("seed") = 0)
      .def_readwrite("train_workloads", &experiment::SplitPlan::train_workloads)
      .def_readwrite("validation_fraction", &experiment::SplitPlan::validation_fraction)
      .def_readwrite("fraction", &experiment::SplitPlan::fraction)
      .def_readwrite("seed", &experiment::SplitPlan::seed);

  py::class_<experiment::Split>(m, "Split")
      .def(py::init<>())
      .def_readwrite("train", &experiment::Split::train)
      .def_readwrite("validation", &experiment::Split::validation)
      .def_readwrite("test", &experiment::Split::test)
      .def_readwrite("unused", &experiment::Split::unused);
  m.def("make_split", &experiment::make_split, py::arg("dataset"), py::arg("plan"));
  m.def("paper_fractions", &experiment::paper_fractions, py::return_value_policy::copy);

  py::class_<experiment::TrainOptions>(m, "TrainOptions")
      .def(py::init([](std::size_t max_epochs, double learning_rate, std::size_t batch_size, bool log_target) {
             experiment::TrainOptions o;
             o.optimizer.max_epochs = max_epochs;
             o.optimizer.learning_rate = learning_rate;
             o.batch_size = batch_size;
             o.log_target = log_target;
             return o;
           }),
           py::arg("max_epochs") = 200, py::arg("learning_rate") = 1e-3, py::arg("batch_size") = 32,
           py::arg("log_target") = false)
      .def_property(
          "max_epochs", [](const experiment::TrainOptions& o) { return o.optimizer.max_epochs; },
          [](experiment::TrainOptions& o, std::size_t v) { o.optimizer.max_epochs = v; })
      .def_property(
          "learning_rate", [](const experiment::TrainOptions& o) { return o.optimizer.learning_rate; },
          [](experiment::TrainOptions& o, double v) { o.optimizer.learning_rate = v; })
      .def_readwrite("batch_size", &experiment::TrainOptions::batch_size)
      .def_readwrite("huber_delta", &experiment::TrainOptions::huber_delta)
      .def_readwrite("log_target", &experiment::TrainOptions::log_target);

  py::class_<experiment::SamplePair>(m, "SamplePair")
      .def_readonly("target", &experiment::SamplePair::target)
      .def_readonly("prediction", &experiment::SamplePair::prediction);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("spec", &RunResult::spec)
      .def_readonly("fraction", &RunResult::fraction)
      .def_readonly("seed", &RunResult::seed)
      .def_readonly("train_l1", &RunResult::train_l1)
      .def_readonly("val_l1", &RunResult::val_l1)
      .def_readonly("test_l1", &RunResult::test_l1)
      .def_readonly("epochs_run", &RunResult::epochs_run)
      .def_readonly("best_epoch", &RunResult::best_epoch)
      .def_readonly("train_count", &RunResult::train_count)
      .def_readonly("val_count", &RunResult::val_count)
      .def_readonly("test_count", &RunResult::test_count)
      .def_readonly("val_history", &RunResult::val_history)
      .def_readonly("test_samples", &RunResult::test_samples)
      .def_property_readonly("stem", [](const RunResult& r) { return experiment::run_stem(r); })
      .def(py::self == py::self);

  m.def(
      "train_model",
      [](const ModelSpec& spec, const Dataset& ds, const experiment::Split& split,
         const experiment::TrainOptions& options, std::uint64_t seed, double fraction) {
        py::gil_scoped_release release;
        auto outcome = experiment::train_model(spec, ds, split, options, seed, fraction);
        return std::make_pair(std::move(outcome.model), std::move(outcome.result));
      },
      py::arg("spec"), py::arg("dataset"), py::arg("split"), py::arg("options") = experiment::TrainOptions{},
      py::arg("seed") = 0, py::arg("fraction") = 1.0,
      "Returns (model, result); the model carries the best-validation weights.");

  py::class_<experiment::SweepConfig>(m, "SweepConfig")
      .def(py::init<>())
      .def_readwrite("specs", &experiment::SweepConfig::specs)
      .def_readwrite("fractions", &experiment::SweepConfig::fractions)
      .def_readwrite("seeds", &experiment::SweepConfig::seeds)
      .def_readwrite("plan", &experiment::SweepConfig::plan)
      .def_readwrite("options", &experiment::SweepConfig::options)
      .def_readwrite("embedding_dim", &experiment::SweepConfig::embedding_dim)
      .def_readwrite("jobs", &experiment::SweepConfig::jobs);

  m.def(
      "sweep",
      [](const Dataset& ds, const experiment::SweepConfig& config) {
        py::gil_scoped_release release;
        return experiment::sweep(ds, config);
      },
      py::arg("dataset"), py::arg("config"));

  m.def(
      "summarize",
      [](const std::vector<RunResult>& results) {
        py::list rows;
        for (const auto& r : experiment::summarize(results)) {
          py::dict d;
          d["fraction"] = r.fraction;
          d["model"] = r.model;
          d["runs"] = r.runs;
          d["train_loss"] = r.train.mean;
          d["test_loss"] = r.test.mean;
          d["train_stderr"] = r.train.std_error;
          d["test_stderr"] = r.test.std_error;
          rows.append(d);
        }
        return rows;
      },
      py::arg("results"));
  m.def(
      "summary_csv", [](const std::vector<RunResult>& results) {
        return experiment::summary_csv(experiment::summarize(results));
      },
      py::arg("results"));
}
