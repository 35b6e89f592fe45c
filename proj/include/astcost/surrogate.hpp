#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "astcost/curves.hpp"
#include "astcost/graph.hpp"
#include "astcost/layers.hpp"
#include "astcost/model_spec.hpp"

namespace astcost::models {

struct InputDims {
  std::size_t feature_dim = 1;
  std::size_t type_vocab_size = 1;
  std::size_t curve_samples = features::kDefaultCurveSamples;

  friend bool operator==(const InputDims&, const InputDims&) = default;
};

struct DenseLayer {
  nn::Parameter weight;
  nn::Parameter bias;
  nn::Activation activation = nn::Activation::kRelu;
};

/// h'_v = relu(h_v W_self + m_v W_msg + b), with m_v the parent's updated
/// state (zero at the root).
struct PropagationLayer {
  nn::Parameter self_weight;
  nn::Parameter message_weight;
  nn::Parameter bias;
};

using ModelInput = std::variant<const AstGraph*, const features::CurveFeatures*>;

/// A surrogate runtime model built from a ModelSpec.
///
/// Weights are Glorot-uniform, biases zero, embeddings Normal(0, 0.1), all
/// drawn from `seed` in declaration order: embedding, encoder, propagation,
/// head. The head ends in a single linear output.
class Surrogate {
 public:
  Surrogate(ModelSpec spec, InputDims dims, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  const InputDims& dims() const { return dims_; }

  /// Declaration order; stable for the lifetime of the object.
  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;
  std::size_t parameter_count() const;

  /// Width of the per-node vector entering the encoder.
  std::size_t node_input_width() const { return dims_.feature_dim + spec_.embedding_dim; }

  nn::Parameter& embedding() { return embedding_; }
  std::vector<DenseLayer>& encoder() { return encoder_; }
  std::vector<PropagationLayer>& propagation() { return propagation_; }
  std::vector<DenseLayer>& head() { return head_; }

 private:
  ModelSpec spec_;
  InputDims dims_;
  nn::Parameter embedding_;
  std::vector<DenseLayer> encoder_;
  std::vector<PropagationLayer> propagation_;
  std::vector<DenseLayer> head_;
};

/// [features || embedding(type)] through the shared encoder MLP: [n x k].
nn::Var encode_nodes(nn::Tape& tape, const AstGraph& graph, Surrogate& model);

/// One top-down round: nodes are visited parent-first, so each node sees its
/// parent's state from the same round. Max-pooling over incoming messages
/// reduces to the single parent message in a tree.
nn::Var propagation_round(nn::Tape& tape, const AstGraph& graph, nn::Var states, PropagationLayer& layer);

/// All propagation rounds of the model; identity for MLP and Curve specs.
nn::Var propagate(nn::Tape& tape, const AstGraph& graph, nn::Var states, Surrogate& model);

/// Node mean, [n x k] -> [1 x k].
nn::Var aggregate(nn::Tape& tape, nn::Var states);

/// The head MLP on one pooled row; returns [1 x 1].
nn::Var predict_head(nn::Tape& tape, nn::Var pooled, Surrogate& model);

/// Full forward pass. Throws std::invalid_argument if the input kind does
/// not match the spec.
nn::Var forward(nn::Tape& tape, Surrogate& model, const ModelInput& input);

/// Inference without gradients. Does not modify the model.
double predict(const Surrogate& model, const ModelInput& input);
inline double predict(const Surrogate& model, const AstGraph& graph) { return predict(model, ModelInput(&graph)); }
inline double predict(const Surrogate& model, const features::CurveFeatures& curves) {
  return predict(model, ModelInput(&curves));
}

}  // namespace astcost::models
