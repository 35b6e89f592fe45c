#pragma once

#include <cstdint>
#include <span>

#include "astcost/tape.hpp"

namespace astcost::nn {

enum class Activation { kNone, kRelu };

/// act(input . weight + bias) for input [n x d_in], weight [d_in x d_out],
/// bias [d_out]. Throws ShapeError on mismatch.
Var dense(Tape& tape, Var input, Var weight, Var bias, Activation activation);
Var dense_forward(Tape& tape, Var input, Parameter& weight, Parameter& bias, Activation activation);

/// Gathers rows of `table` [V x k]; the backward pass scatter-adds. Throws
/// std::out_of_range for ids >= V.
Var embedding_lookup(Tape& tape, Parameter& table, std::span<const std::uint32_t> ids);

/// [n x a] ++ [n x b] -> [n x (a+b)].
Var concat_cols(Tape& tape, Var left, Var right);

/// Stacks [1 x k] rows (or single values) into [n x k].
Var stack_rows(Tape& tape, std::span<const Var> rows);

/// Column-wise mean [n x k] -> [1 x k]. Throws ShapeError when n = 0.
Var mean_rows(Tape& tape, Var input);

/// Sum of every element, as a single value.
Var sum(Tape& tape, Var input);

/// Mean Huber loss; |e| == delta takes the quadratic branch. `pred` is
/// compared element-wise with `target` regardless of shape. Throws
/// std::invalid_argument on empty input or length mismatch.
Var huber_loss(Tape& tape, Var pred, const Tensor& target, double delta = 1.0);

/// Mean absolute error; the subgradient at zero error is 0.
Var l1_loss(Tape& tape, Var pred, const Tensor& target);

double huber_loss(std::span<const double> pred, std::span<const double> target, double delta = 1.0);
double l1_loss(std::span<const double> pred, std::span<const double> target);

/// Low-level kernels shared by layers elsewhere.
/// out[n x m] (+)= a[n x k] . b[k x m]
void matmul_acc(const double* a, const double* b, double* out, std::size_t n, std::size_t k, std::size_t m);
/// out[n x k] (+)= g[n x m] . b[k x m]^T
void matmul_bt_acc(const double* g, const double* b, double* out, std::size_t n, std::size_t k,
                   std::size_t m);
/// out[k x m] (+)= a[n x k]^T . g[n x m]
void matmul_at_acc(const double* a, const double* g, double* out, std::size_t n, std::size_t k,
                   std::size_t m);

}  // namespace astcost::nn
