#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "astcost/tensor.hpp"

namespace astcost::nn {

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = std::numeric_limits<std::size_t>::max();
};

/// Reverse-mode autodiff tape. Every op appends its output together with a
/// closure that maps the output gradient to input gradients. Parameter leaves
/// write straight into Parameter::grad, so gradients accumulate across
/// backward() calls until the caller zeroes them.
///
/// A tape is owned by one thread; the Parameters it references must outlive it.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  Var constant(Tensor value);
  Var parameter(Parameter& p);
  Var record(Tensor value, bool requires_grad, BackwardFn backward);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  /// Gradient buffer of `v`, zero-filled on first access.
  Tensor& grad(Var v);

  /// Seeds d(loss)/d(loss) = 1 and runs every closure in reverse order.
  /// Throws ShapeError if `loss` is not a single value.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  /// ReLU on/off pattern of every activation evaluated so far, in order.
  /// Finite-difference checks compare it to detect kink crossings.
  void append_activation_pattern(std::span<const double> pre_activation);
  const std::vector<std::uint8_t>& activation_pattern() const { return pattern_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };
  Node& node(Var v);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  std::vector<std::uint8_t> pattern_;
};

}  // namespace astcost::nn
