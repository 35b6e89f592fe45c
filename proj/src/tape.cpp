#include "astcost/tape.hpp"

#include <stdexcept>

#include "astcost/errors.hpp"

namespace astcost::nn {

Tape::Node& Tape::node(Var v) {
  if (v.id >= nodes_.size()) throw std::out_of_range("tape: invalid Var");
  return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw std::out_of_range("tape: invalid Var");
  return nodes_[v.id];
}

Var Tape::constant(Tensor value) {
  ensure_finite(value, "constant");
  nodes_.push_back({std::move(value), {}, nullptr, false, {}});
  return {nodes_.size() - 1};
}

Var Tape::parameter(Parameter& p) {
  nodes_.push_back({{}, {}, &p, true, {}});
  return {nodes_.size() - 1};
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back({std::move(value), {}, nullptr, requires_grad, requires_grad ? std::move(backward) : BackwardFn{}});
  return {nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->value : n.value;
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Tensor& Tape::grad(Var v) {
  Node& n = node(v);
  if (n.param) {
    if (n.param->grad.shape() != n.param->value.shape()) n.param->grad = Tensor::zeros_like(n.param->value);
    return n.param->grad;
  }
  if (n.grad.shape() != n.value.shape()) n.grad = Tensor::zeros_like(n.value);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw ShapeError("backward on non-scalar of shape " + shape_string(value(loss).shape()));
  }
  for (auto& n : nodes_) {
    if (!n.param) n.grad = Tensor();
  }
  grad(loss).fill(0.0);
  if (!node(loss).param) grad(loss)[0] = 1.0;
  else grad(loss)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad);
  }
}

void Tape::append_activation_pattern(std::span<const double> pre_activation) {
  for (double v : pre_activation) pattern_.push_back(v > 0.0 ? 1 : 0);
}

}  // namespace astcost::nn
