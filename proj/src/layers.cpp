#include "astcost/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "astcost/errors.hpp"

namespace astcost::nn {

void matmul_acc(const double* a, const double* b, double* out, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = a[i * k + p];
      if (s == 0.0) continue;
      const double* brow = b + p * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += s * brow[j];
    }
  }
}

void matmul_bt_acc(const double* g, const double* b, double* out, std::size_t n, std::size_t k,
                   std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* grow = g + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * m;
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
      out[i * k + p] += acc;
    }
  }
}

void matmul_at_acc(const double* a, const double* g, double* out, std::size_t n, std::size_t k,
                   std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* grow = g + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = a[i * k + p];
      if (s == 0.0) continue;
      double* orow = out + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += s * grow[j];
    }
  }
}

Var dense(Tape& tape, Var input, Var weight, Var bias, Activation activation) {
  const Tensor& x = tape.value(input);
  const Tensor& w = tape.value(weight);
  const Tensor& b = tape.value(bias);
  if (x.rank() != 2 || w.rank() != 2 || x.cols() != w.rows() || b.size() != w.cols()) {
    throw ShapeError("dense: input " + shape_string(x.shape()) + ", weight " + shape_string(w.shape()) +
                     ", bias " + shape_string(b.shape()));
  }
  const std::size_t n = x.rows(), d_in = w.rows(), d_out = w.cols();
  Tensor out({n, d_out});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d_out; ++j) out.at(i, j) = b[j];
  }
  matmul_acc(x.data(), w.data(), out.data(), n, d_in, d_out);
  if (activation == Activation::kRelu) {
    tape.append_activation_pattern(out.values());
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  }
  ensure_finite(out, "dense");

  const bool needs = tape.requires_grad(input) || tape.requires_grad(weight) || tape.requires_grad(bias);
  // Relu backward only needs the sign of the output, so the closure reads
  // the recorded output instead of keeping the pre-activation around.
  const Var out_var{tape.size()};
  return tape.record(std::move(out), needs, [=](Tape& t, const Tensor& g_out) {
    const Tensor* g = &g_out;
    Tensor masked;
    if (activation == Activation::kRelu) {
      masked = g_out;
      const Tensor& y = t.value(out_var);
      for (std::size_t i = 0; i < masked.size(); ++i) {
        if (!(y[i] > 0.0)) masked[i] = 0.0;
      }
      g = &masked;
    }
    const Tensor& xv = t.value(input);
    const Tensor& wv = t.value(weight);
    if (t.requires_grad(input)) matmul_bt_acc(g->data(), wv.data(), t.grad(input).data(), n, d_in, d_out);
    if (t.requires_grad(weight)) matmul_at_acc(xv.data(), g->data(), t.grad(weight).data(), n, d_in, d_out);
    if (t.requires_grad(bias)) {
      Tensor& gb = t.grad(bias);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d_out; ++j) gb[j] += g->at(i, j);
      }
    }
  });
}

Var dense_forward(Tape& tape, Var input, Parameter& weight, Parameter& bias, Activation activation) {
  return dense(tape, input, tape.parameter(weight), tape.parameter(bias), activation);
}

Var embedding_lookup(Tape& tape, Parameter& table, std::span<const std::uint32_t> ids) {
  const Tensor& tv = table.value;
  if (tv.rank() != 2) throw ShapeError("embedding table must be a matrix");
  const std::size_t vocab = tv.rows(), k = tv.cols();
  Tensor out({ids.size(), k});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab) {
      throw std::out_of_range("embedding id " + std::to_string(ids[i]) + " outside vocabulary of size " +
                              std::to_string(vocab));
    }
    for (std::size_t j = 0; j < k; ++j) out.at(i, j) = tv.at(ids[i], j);
  }
  const Var tbl = tape.parameter(table);
  std::vector<std::uint32_t> id_copy(ids.begin(), ids.end());
  return tape.record(std::move(out), true, [tbl, k, id_copy = std::move(id_copy)](Tape& t, const Tensor& g) {
    Tensor& gt = t.grad(tbl);
    for (std::size_t i = 0; i < id_copy.size(); ++i) {
      for (std::size_t j = 0; j < k; ++j) gt.at(id_copy[i], j) += g.at(i, j);
    }
  });
}

Var concat_cols(Tape& tape, Var left, Var right) {
  const Tensor& a = tape.value(left);
  const Tensor& b = tape.value(right);
  if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows()) {
    throw ShapeError("concat_cols: " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  }
  const std::size_t n = a.rows(), ca = a.cols(), cb = b.cols();
  Tensor out({n, ca + cb});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < ca; ++j) out.at(i, j) = a.at(i, j);
    for (std::size_t j = 0; j < cb; ++j) out.at(i, ca + j) = b.at(i, j);
  }
  const bool needs = tape.requires_grad(left) || tape.requires_grad(right);
  return tape.record(std::move(out), needs, [=](Tape& t, const Tensor& g) {
    if (t.requires_grad(left)) {
      Tensor& ga = t.grad(left);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < ca; ++j) ga.at(i, j) += g.at(i, j);
    }
    if (t.requires_grad(right)) {
      Tensor& gb = t.grad(right);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cb; ++j) gb.at(i, j) += g.at(i, ca + j);
    }
  });
}

Var stack_rows(Tape& tape, std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no rows");
  const std::size_t k = tape.value(rows[0]).size();
  Tensor out({rows.size(), k});
  bool needs = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& r = tape.value(rows[i]);
    if (r.size() != k) throw ShapeError("stack_rows: rows of different width");
    for (std::size_t j = 0; j < k; ++j) out.at(i, j) = r[j];
    needs = needs || tape.requires_grad(rows[i]);
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  return tape.record(std::move(out), needs, [inputs = std::move(inputs), k](Tape& t, const Tensor& g) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!t.requires_grad(inputs[i])) continue;
      Tensor& gi = t.grad(inputs[i]);
      for (std::size_t j = 0; j < k; ++j) gi[j] += g.at(i, j);
    }
  });
}

Var mean_rows(Tape& tape, Var input) {
  const Tensor& x = tape.value(input);
  if (x.rank() != 2 || x.rows() == 0) throw ShapeError("mean_rows: need at least one row, got " + shape_string(x.shape()));
  const std::size_t n = x.rows(), k = x.cols();
  Tensor out({1, k});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out[j] += x.at(i, j);
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out.values()) v *= inv;
  return tape.record(std::move(out), tape.requires_grad(input), [=](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad(input);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) gx.at(i, j) += g[j] * inv;
  });
}

Var sum(Tape& tape, Var input) {
  double s = 0.0;
  for (double v : tape.value(input).values()) s += v;
  return tape.record(Tensor::scalar(s), tape.requires_grad(input), [=](Tape& t, const Tensor& g) {
    for (double& v : t.grad(input).values()) v += g[0];
  });
}

namespace {
void check_loss_inputs(std::size_t pred, std::size_t target, const char* name) {
  if (pred == 0) throw std::invalid_argument(std::string(name) + ": empty input");
  if (pred != target) {
    throw std::invalid_argument(std::string(name) + ": " + std::to_string(pred) + " predictions for " +
                                std::to_string(target) + " targets");
  }
}

double huber_term(double e, double delta) {
  const double a = std::abs(e);
  return a <= delta ? 0.5 * e * e : delta * (a - 0.5 * delta);
}

double huber_slope(double e, double delta) {
  if (std::abs(e) <= delta) return e;
  return e > 0.0 ? delta : -delta;
}
}  // namespace

double huber_loss(std::span<const double> pred, std::span<const double> target, double delta) {
  check_loss_inputs(pred.size(), target.size(), "huber_loss");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += huber_term(pred[i] - target[i], delta);
  return s / static_cast<double>(pred.size());
}

double l1_loss(std::span<const double> pred, std::span<const double> target) {
  check_loss_inputs(pred.size(), target.size(), "l1_loss");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
  return s / static_cast<double>(pred.size());
}

Var huber_loss(Tape& tape, Var pred, const Tensor& target, double delta) {
  const Tensor& p = tape.value(pred);
  const double loss = huber_loss(p.values(), target.values(), delta);
  if (!std::isfinite(loss)) throw NumericError("non-finite value produced by huber_loss");
  return tape.record(Tensor::scalar(loss), tape.requires_grad(pred), [=](Tape& t, const Tensor& g) {
    const Tensor& pv = t.value(pred);
    Tensor& gp = t.grad(pred);
    const double scale = g[0] / static_cast<double>(pv.size());
    for (std::size_t i = 0; i < pv.size(); ++i) gp[i] += scale * huber_slope(pv[i] - target[i], delta);
  });
}

Var l1_loss(Tape& tape, Var pred, const Tensor& target) {
  const Tensor& p = tape.value(pred);
  const double loss = l1_loss(p.values(), target.values());
  if (!std::isfinite(loss)) throw NumericError("non-finite value produced by l1_loss");
  return tape.record(Tensor::scalar(loss), tape.requires_grad(pred), [=](Tape& t, const Tensor& g) {
    const Tensor& pv = t.value(pred);
    Tensor& gp = t.grad(pred);
    const double scale = g[0] / static_cast<double>(pv.size());
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double e = pv[i] - target[i];
      gp[i] += e > 0.0 ? scale : (e < 0.0 ? -scale : 0.0);
    }
  });
}

}  // namespace astcost::nn
