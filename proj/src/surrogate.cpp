#include "astcost/surrogate.hpp"

#include <cmath>
#include <stdexcept>

#include "astcost/errors.hpp"
#include "astcost/rng.hpp"

namespace astcost::models {

using nn::Activation;
using nn::Parameter;
using nn::Tape;
using nn::Tensor;
using nn::Var;

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
  return t;
}

DenseLayer make_dense(const std::string& name, std::size_t in, std::size_t out, Activation act, Rng& rng) {
  return {Parameter(name + ".weight", glorot(in, out, rng)), Parameter(name + ".bias", Tensor({out})), act};
}

bool uses_embedding(const ModelSpec& s) { return s.input == InputKind::kGraph && s.embedding_dim > 0; }

}  // namespace

Surrogate::Surrogate(ModelSpec spec, InputDims dims, std::uint64_t seed) : spec_(std::move(spec)), dims_(dims) {
  if (spec_.head_widths.empty()) throw std::invalid_argument("model head needs at least one hidden layer");
  Rng rng(seed);
  std::size_t width;
  if (spec_.input == InputKind::kGraph) {
    if (uses_embedding(spec_)) {
      Tensor table({dims_.type_vocab_size, spec_.embedding_dim});
      for (double& v : table.values()) v = rng.normal(0.0, 0.1);
      embedding_ = Parameter("embedding", std::move(table));
    }
    width = node_input_width();
    for (std::size_t i = 0; i < spec_.encoder_widths.size(); ++i) {
      encoder_.push_back(make_dense("encoder." + std::to_string(i), width, spec_.encoder_widths[i], Activation::kRelu, rng));
      width = spec_.encoder_widths[i];
    }
    for (std::size_t i = 0; i < spec_.propagation_widths.size(); ++i) {
      const std::size_t out = spec_.propagation_widths[i];
      const std::string name = "propagation." + std::to_string(i);
      PropagationLayer layer;
      layer.self_weight = Parameter(name + ".self_weight", glorot(width, out, rng));
      layer.message_weight = Parameter(name + ".message_weight", glorot(out, out, rng));
      layer.bias = Parameter(name + ".bias", Tensor({out}));
      propagation_.push_back(std::move(layer));
      width = out;
    }
  } else {
    if (!spec_.encoder_widths.empty() || !spec_.propagation_widths.empty()) {
      throw std::invalid_argument("curve models take no encoder or propagation stage");
    }
    width = 2 * dims_.curve_samples;
  }
  for (std::size_t i = 0; i < spec_.head_widths.size(); ++i) {
    head_.push_back(make_dense("head." + std::to_string(i), width, spec_.head_widths[i], Activation::kRelu, rng));
    width = spec_.head_widths[i];
  }
  head_.push_back(make_dense("head." + std::to_string(spec_.head_widths.size()), width, 1, Activation::kNone, rng));
}

std::vector<Parameter*> Surrogate::parameters() {
  std::vector<Parameter*> out;
  if (uses_embedding(spec_)) out.push_back(&embedding_);
  for (auto& l : encoder_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  for (auto& l : propagation_) {
    out.push_back(&l.self_weight);
    out.push_back(&l.message_weight);
    out.push_back(&l.bias);
  }
  for (auto& l : head_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Parameter*> Surrogate::parameters() const {
  auto mutable_params = const_cast<Surrogate*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

std::size_t Surrogate::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->value.size();
  return n;
}

Var encode_nodes(Tape& tape, const AstGraph& graph, Surrogate& model) {
  if (model.spec().input != InputKind::kGraph) throw std::invalid_argument("encode_nodes on a curve model");
  if (graph.feature_dim() != model.dims().feature_dim) {
    throw ShapeError("graph feature width " + std::to_string(graph.feature_dim()) + " but model expects " +
                     std::to_string(model.dims().feature_dim));
  }
  Var x = tape.constant(Tensor::matrix(graph.node_count(), graph.feature_dim(), graph.features()));
  if (model.spec().embedding_dim > 0) {
    x = nn::concat_cols(tape, x, nn::embedding_lookup(tape, model.embedding(), graph.node_types()));
  }
  for (auto& layer : model.encoder()) x = nn::dense_forward(tape, x, layer.weight, layer.bias, layer.activation);
  return x;
}

Var propagation_round(Tape& tape, const AstGraph& graph, Var states, PropagationLayer& layer) {
  const Tensor& x = tape.value(states);
  const Tensor& w_self = layer.self_weight.value;
  const Tensor& w_msg = layer.message_weight.value;
  const std::size_t n = graph.node_count();
  if (x.rank() != 2 || x.rows() != n || x.cols() != w_self.rows()) {
    throw ShapeError("propagate: states " + nn::shape_string(x.shape()) + " vs self weight " +
                     nn::shape_string(w_self.shape()) + " on " + std::to_string(n) + " nodes");
  }
  const std::size_t k = w_self.rows(), w = w_self.cols();

  Tensor h({n, w});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < w; ++j) h.at(i, j) = layer.bias.value[j];
  nn::matmul_acc(x.data(), w_self.data(), h.data(), n, k, w);
  const auto& order = graph.topological_order();
  const auto& parent = graph.parents();
  for (NodeIndex v : order) {
    double* row = h.data() + v * w;
    if (!graph.is_root(v)) nn::matmul_acc(h.data() + parent[v] * w, w_msg.data(), row, 1, w, w);
    tape.append_activation_pattern({row, w});
    for (std::size_t j = 0; j < w; ++j) row[j] = row[j] > 0.0 ? row[j] : 0.0;
  }
  nn::ensure_finite(h, "propagate");

  const Var self_var = tape.parameter(layer.self_weight);
  const Var msg_var = tape.parameter(layer.message_weight);
  const Var bias_var = tape.parameter(layer.bias);
  const Var out_var{tape.size()};
  const NodeIndex root = graph.root();
  return tape.record(std::move(h), true, [=](Tape& t, const Tensor& g_out) {
    const Tensor& hv = t.value(out_var);
    const Tensor& xv = t.value(states);
    const Tensor& ws = t.value(self_var);
    const Tensor& wm = t.value(msg_var);
    Tensor g = g_out;  // accumulates contributions from children
    Tensor g_pre({n, w});
    Tensor& g_msg = t.grad(msg_var);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeIndex v = *it;
      double* gp = g_pre.data() + v * w;
      const double* gv = g.data() + v * w;
      const double* hrow = hv.data() + v * w;
      for (std::size_t j = 0; j < w; ++j) gp[j] = hrow[j] > 0.0 ? gv[j] : 0.0;
      if (v != root) {
        const NodeIndex p = parent[v];
        nn::matmul_bt_acc(gp, wm.data(), g.data() + p * w, 1, w, w);
        nn::matmul_at_acc(hv.data() + p * w, gp, g_msg.data(), 1, w, w);
      }
    }
    if (t.requires_grad(states)) nn::matmul_bt_acc(g_pre.data(), ws.data(), t.grad(states).data(), n, k, w);
    nn::matmul_at_acc(xv.data(), g_pre.data(), t.grad(self_var).data(), n, k, w);
    Tensor& gb = t.grad(bias_var);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) gb[j] += g_pre.at(i, j);
  });
}

Var propagate(Tape& tape, const AstGraph& graph, Var states, Surrogate& model) {
  for (auto& layer : model.propagation()) states = propagation_round(tape, graph, states, layer);
  return states;
}

Var aggregate(Tape& tape, Var states) { return nn::mean_rows(tape, states); }

Var predict_head(Tape& tape, Var pooled, Surrogate& model) {
  for (auto& layer : model.head()) pooled = nn::dense_forward(tape, pooled, layer.weight, layer.bias, layer.activation);
  return pooled;
}

Var forward(Tape& tape, Surrogate& model, const ModelInput& input) {
  if (const auto* g = std::get_if<const AstGraph*>(&input)) {
    if (model.spec().input != InputKind::kGraph) {
      throw std::invalid_argument("model " + model.spec().label + " expects curve features, got a graph");
    }
    Var states = encode_nodes(tape, **g, model);
    states = propagate(tape, **g, states, model);
    return predict_head(tape, aggregate(tape, states), model);
  }
  const auto* curves = std::get<const features::CurveFeatures*>(input);
  if (model.spec().input != InputKind::kCurve) {
    throw std::invalid_argument("model " + model.spec().label + " expects a graph, got curve features");
  }
  if (curves->width() != 2 * model.dims().curve_samples) {
    throw ShapeError("curve width " + std::to_string(curves->width()) + " but model expects " +
                     std::to_string(2 * model.dims().curve_samples));
  }
  Var x = tape.constant(Tensor::matrix(1, curves->width(), curves->values));
  return predict_head(tape, x, model);
}

double predict(const Surrogate& model, const ModelInput& input) {
  // The tape only reads parameters unless backward() runs, which it never
  // does here, so sharing a frozen model across threads is safe.
  Tape tape;
  return tape.value(forward(tape, const_cast<Surrogate&>(model), input))[0];
}

}  // namespace astcost::models
