#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace astcost::models {

enum class InputKind { kGraph, kCurve };

/// Declarative description of the encode / propagate / aggregate / predict
/// stages. Aggregation is always the node mean, messages always flow root to
/// leaves, and incoming messages are max-pooled.
struct ModelSpec {
  std::string label;
  std::vector<std::size_t> encoder_widths;
  std::vector<std::size_t> propagation_widths;
  std::vector<std::size_t> head_widths{128, 64};
  std::size_t embedding_dim = 32;
  InputKind input = InputKind::kGraph;

  static constexpr const char* kAggregation = "mean";
  static constexpr const char* kMessagePool = "max";
  static constexpr const char* kMessageDirection = "top_down";

  /// One of MLP1..3, GCN1..3, Curve. Throws std::invalid_argument.
  static ModelSpec from_label(std::string_view label, std::size_t embedding_dim = 32);
  /// All seven labels in table order.
  static const std::vector<std::string>& labels();

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

}  // namespace astcost::models
