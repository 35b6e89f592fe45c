#include <doctest.h>

#include <cmath>

#include "astcost/errors.hpp"
#include "astcost/layers.hpp"
#include "astcost/optim.hpp"
#include "astcost/rng.hpp"
#include "astcost/tape.hpp"
#include "support/gradcheck.hpp"

using namespace astcost;
using namespace astcost::nn;

namespace {

Parameter random_param(const std::string& name, std::size_t r, std::size_t c, Rng& rng) {
  // c == 0 asks for a vector of length r.
  std::vector<double> v(c == 0 ? r : r * c);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Parameter(name, c == 0 ? Tensor::vector(v) : Tensor::matrix(r, c, v));
}

Parameter vec_param(const std::string& name, std::vector<double> v) { return Parameter(name, Tensor::vector(v)); }

}  // namespace

TEST_CASE("tensor basics") {
  Tensor m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.at(1, 2) == 6);
  CHECK(shape_string(m.shape()) == "[2x3]");
  CHECK_THROWS_AS(Tensor::vector({1, 2}).rows(), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(m.add(Tensor::vector({1})), ShapeError);
  Tensor bad = Tensor::vector({1.0, NAN});
  CHECK_THROWS_AS(ensure_finite(bad, "test"), NumericError);
  CHECK_NOTHROW(ensure_finite(m, "test"));
}

TEST_CASE("dense examples") {
  Parameter w("w", Tensor::matrix(2, 2, {1, 0, 0, 1}));
  Parameter b = vec_param("b", {0, 0});
  {
    Tape tape;
    Var out = dense_forward(tape, tape.constant(Tensor::matrix(1, 2, {1, 2})), w, b, Activation::kRelu);
    CHECK(tape.value(out) == Tensor::matrix(1, 2, {1, 2}));
  }
  {
    Tape tape;
    Var out = dense_forward(tape, tape.constant(Tensor::matrix(1, 2, {1, -3})), w, b, Activation::kRelu);
    CHECK(tape.value(out) == Tensor::matrix(1, 2, {1, 0}));
  }
  {
    Tape tape;
    Var out = dense_forward(tape, tape.constant(Tensor::matrix(1, 2, {1, -3})), w, b, Activation::kNone);
    CHECK(tape.value(out) == Tensor::matrix(1, 2, {1, -3}));
  }
}

TEST_CASE("dense matches a naive triple loop") {
  Rng rng(42);
  Parameter x = random_param("x", 4, 3, rng);
  Parameter w = random_param("w", 3, 2, rng);
  Parameter b = random_param("b", 2, 0, rng);
  Tape tape;
  Var out = dense_forward(tape, tape.constant(x.value), w, b, Activation::kNone);
  const Tensor& y = tape.value(out);
  REQUIRE(y.shape() == std::vector<std::size_t>{4, 2});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double ref = b.value[j];
      for (std::size_t k = 0; k < 3; ++k) ref += x.value.at(i, k) * w.value.at(k, j);
      CHECK(std::abs(y.at(i, j) - ref) < 1e-12);
    }
  }
}

TEST_CASE("dense shape errors") {
  Parameter w("w", Tensor::matrix(3, 2, std::vector<double>(6, 0.0)));
  Parameter b = vec_param("b", {0, 0});
  Parameter b3 = vec_param("b3", {0, 0, 0});
  Tape tape;
  CHECK_THROWS_AS(dense_forward(tape, tape.constant(Tensor::matrix(1, 2, {1, 2})), w, b, Activation::kNone),
                  ShapeError);
  CHECK_THROWS_AS(dense_forward(tape, tape.constant(Tensor::matrix(1, 3, {1, 2, 3})), w, b3, Activation::kNone),
                  ShapeError);
}

TEST_CASE("embedding lookup") {
  Parameter table("e", Tensor::matrix(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9}));
  table.zero_grad();
  {
    Tape tape;
    const std::vector<std::uint32_t> ids = {0};
    CHECK(tape.value(embedding_lookup(tape, table, ids)) == Tensor::matrix(1, 3, {1, 2, 3}));
  }
  {
    Tape tape;
    const std::vector<std::uint32_t> ids = {2, 2};
    Var rows = embedding_lookup(tape, table, ids);
    tape.backward(sum(tape, rows));
    CHECK(table.grad == Tensor::matrix(3, 3, {0, 0, 0, 0, 0, 0, 2, 2, 2}));
  }
  {
    Tape tape;
    const std::vector<std::uint32_t> ids;
    const Tensor& out = tape.value(embedding_lookup(tape, table, ids));
    CHECK(out.shape() == std::vector<std::size_t>{0, 3});
  }
  Tape tape;
  const std::vector<std::uint32_t> bad = {3};
  CHECK_THROWS_AS(embedding_lookup(tape, table, bad), std::out_of_range);
}

TEST_CASE("embedding gradient matches finite differences") {
  Rng rng(3);
  Parameter table = random_param("e", 4, 3, rng);
  Parameter w = random_param("w", 3, 1, rng);
  Parameter b = random_param("b", 1, 0, rng);
  const std::vector<std::uint32_t> ids = {2, 2, 0};
  auto build = [&](Tape& tape) {
    Var rows = embedding_lookup(tape, table, ids);
    Var out = dense_forward(tape, rows, w, b, Activation::kNone);
    return huber_loss(tape, out, Tensor::vector({0.3, -0.1, 0.2}));
  };
  const auto r = testing::check_gradients({&table, &w, &b}, build, 1);
  CHECK(r.checked > 0);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("concat, stack and mean") {
  Tape tape;
  Var a = tape.constant(Tensor::matrix(2, 1, {1, 3}));
  Var b = tape.constant(Tensor::matrix(2, 2, {3, 1, 5, 7}));
  CHECK(tape.value(concat_cols(tape, a, b)) == Tensor::matrix(2, 3, {1, 3, 1, 3, 5, 7}));
  CHECK_THROWS_AS(concat_cols(tape, a, tape.constant(Tensor::matrix(1, 1, {1}))), ShapeError);

  Var m = tape.constant(Tensor::matrix(2, 2, {1, 3, 3, 1}));
  CHECK(tape.value(mean_rows(tape, m)) == Tensor::matrix(1, 2, {2, 2}));
  Var single = tape.constant(Tensor::matrix(1, 2, {4, 5}));
  CHECK(tape.value(mean_rows(tape, single)) == Tensor::matrix(1, 2, {4, 5}));
  CHECK_THROWS_AS(mean_rows(tape, tape.constant(Tensor({0, 2}))), ShapeError);

  const std::vector<Var> rows = {tape.constant(Tensor::scalar(1)), tape.constant(Tensor::scalar(2))};
  CHECK(tape.value(stack_rows(tape, rows)).values().size() == 2);
}

TEST_CASE("huber loss values") {
  const std::vector<double> zero = {0.0};
  CHECK(huber_loss(std::vector<double>{1.5}, std::vector<double>{1.5}) == 0.0);
  CHECK(huber_loss(std::vector<double>{2.0}, zero) == 1.5);
  CHECK(huber_loss(std::vector<double>{0.5}, zero) == 0.125);
  CHECK(huber_loss(std::vector<double>{1.0}, zero) == 0.5);  // boundary, quadratic branch
  CHECK(huber_loss(std::vector<double>{-3.0}, zero, 2.0) == 4.0);
  CHECK_THROWS_AS(huber_loss(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(huber_loss(std::vector<double>{1}, std::vector<double>{1, 2}), std::invalid_argument);

  Rng rng(5);
  std::vector<double> p(50), t(50);
  double mse = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    p[i] = rng.uniform(-20, 20);
    t[i] = rng.uniform(-20, 20);
    mse += (p[i] - t[i]) * (p[i] - t[i]);
  }
  mse /= 50.0;
  CHECK(std::abs(huber_loss(p, t, 1e9) - 0.5 * mse) < 1e-9);
  CHECK(huber_loss(p, t) >= 0.0);
}

TEST_CASE("l1 loss values") {
  CHECK(l1_loss(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
  CHECK(l1_loss(std::vector<double>{3}, std::vector<double>{1}) == 2.0);
  CHECK(l1_loss(std::vector<double>{0, 4}, std::vector<double>{1, 1}) == 2.0);
  CHECK_THROWS_AS(l1_loss(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("tape losses agree with the span versions and differentiate") {
  Parameter p = vec_param("p", {2.0, 0.5, -0.25, 0.0});
  const Tensor target = Tensor::vector({0.0, 0.0, 0.0, 0.0});
  {
    Tape tape;
    p.zero_grad();
    Var loss = huber_loss(tape, tape.parameter(p), target);
    CHECK(tape.value(loss)[0] == huber_loss(p.value.values(), target.values()));
    tape.backward(loss);
    // d/dp mean huber: clipped error / n
    CHECK(p.grad == Tensor::vector({0.25, 0.125, -0.0625, 0.0}));
  }
  {
    Tape tape;
    p.zero_grad();
    Var loss = l1_loss(tape, tape.parameter(p), target);
    CHECK(tape.value(loss)[0] == l1_loss(p.value.values(), target.values()));
    tape.backward(loss);
    CHECK(p.grad == Tensor::vector({0.25, 0.25, -0.25, 0.0}));
  }
}

TEST_CASE("backward basics") {
  Parameter p("p", Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  p.zero_grad();
  auto run = [&] {
    Tape tape;
    tape.backward(sum(tape, tape.parameter(p)));
  };
  run();
  CHECK(p.grad == Tensor::matrix(2, 3, std::vector<double>(6, 1.0)));
  run();
  CHECK(p.grad == Tensor::matrix(2, 3, std::vector<double>(6, 2.0)));

  Tape tape;
  CHECK_THROWS_AS(tape.backward(tape.parameter(p)), ShapeError);
}

TEST_CASE("composed layers pass the gradient check") {
  Rng rng(11);
  Parameter x = random_param("x", 5, 4, rng);
  Parameter w1 = random_param("w1", 4, 6, rng);
  Parameter b1 = random_param("b1", 6, 0, rng);
  Parameter w2 = random_param("w2", 7, 1, rng);
  Parameter b2 = random_param("b2", 1, 0, rng);
  Parameter side = random_param("side", 5, 1, rng);
  auto build = [&](Tape& tape) {
    Var h = dense_forward(tape, tape.parameter(x), w1, b1, Activation::kRelu);
    Var joined = concat_cols(tape, h, tape.parameter(side));
    Var pooled = mean_rows(tape, joined);
    Var out = dense_forward(tape, pooled, w2, b2, Activation::kNone);
    Var rows = stack_rows(tape, std::vector<Var>{out, out});
    return huber_loss(tape, rows, Tensor::vector({0.2, 3.0}));
  };
  const auto r = testing::check_gradients({&x, &w1, &b1, &w2, &b2, &side}, build, 2, 32);
  CHECK(r.checked > 30);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("adam step") {
  OptimizerConfig cfg;
  {
    Parameter p = vec_param("p", {1.0, -2.0});
    p.zero_grad();
    std::vector<Parameter*> ps = {&p};
    for (int i = 0; i < 5; ++i) adam_step(ps, cfg, 1e-3);
    CHECK(p.value == Tensor::vector({1.0, -2.0}));
    CHECK(p.step_count == 5);
  }
  {
    Parameter p = vec_param("p", {1.0});
    p.grad = Tensor::vector({0.5});
    std::vector<Parameter*> ps = {&p};
    adam_step(ps, cfg, 1e-3);
    CHECK(std::abs(p.value[0] - 0.999) < 1e-6);
    CHECK(p.grad[0] == 0.5);  // untouched
    CHECK(p.step_count == 1);
  }
}

TEST_CASE("adam matches a scalar reference over 100 steps") {
  OptimizerConfig cfg;
  Parameter p = vec_param("p", {0.7, -1.3});
  std::vector<Parameter*> ps = {&p};
  double ref[2] = {0.7, -1.3}, m[2] = {0, 0}, v[2] = {0, 0};
  for (int t = 1; t <= 100; ++t) {
    // Gradient of a fixed quadratic-plus-sine objective evaluated at the current point.
    p.grad = Tensor::vector({2.0 * p.value[0] + std::sin(3.0 * p.value[1]), 0.5 * p.value[1] - 1.0});
    const double g[2] = {2.0 * ref[0] + std::sin(3.0 * ref[1]), 0.5 * ref[1] - 1.0};
    const double lr = t < 50 ? 1e-2 : 3e-3;
    adam_step(ps, cfg, lr);
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1.0 - std::pow(0.9, t));
      const double vh = v[i] / (1.0 - std::pow(0.999, t));
      ref[i] -= lr * mh / (std::sqrt(vh) + 1e-8);
    }
  }
  CHECK(std::abs(p.value[0] - ref[0]) < 1e-10);
  CHECK(std::abs(p.value[1] - ref[1]) < 1e-10);
}

TEST_CASE("optimizer config validation") {
  OptimizerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.decay_factor = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.min_learning_rate = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("scheduler keeps the rate under steady improvement") {
  OptimizerConfig cfg;
  PlateauScheduler s(cfg);
  double loss = 10.0;
  for (int e = 0; e < 50; ++e) {
    CHECK(s.step(loss) == 1e-3);
    loss *= 0.98;
  }
}

TEST_CASE("scheduler decays at epoch 7 under a constant loss") {
  OptimizerConfig cfg;
  PlateauScheduler s(cfg);
  for (int e = 1; e <= 6; ++e) CHECK(s.step(5.0) == 1e-3);
  CHECK(s.step(5.0) == doctest::Approx(9e-4).epsilon(1e-15));
  // The window restarts after a decay.
  for (int e = 8; e <= 12; ++e) CHECK(s.step(5.0) == doctest::Approx(9e-4).epsilon(1e-15));
  CHECK(s.step(5.0) == doctest::Approx(8.1e-4).epsilon(1e-15));
}

TEST_CASE("scheduler clamps at the minimum rate") {
  OptimizerConfig cfg;
  PlateauScheduler s(cfg);
  double prev = s.learning_rate();
  for (int e = 0; e < 2000; ++e) {
    const double lr = s.step(5.0);
    CHECK(lr <= prev);
    CHECK(lr >= 1e-6);
    prev = lr;
  }
  CHECK(prev == 1e-6);
}

TEST_CASE("scheduler counts sub-threshold progress cumulatively") {
  OptimizerConfig cfg;
  PlateauScheduler s(cfg);
  // 0.4% per epoch: every third epoch clears 1% against the reference.
  double loss = 1.0;
  for (int e = 0; e < 60; ++e) {
    CHECK(s.step(loss) == 1e-3);
    loss *= 0.996;
  }
  // An improvement smaller than 1% does not reset the window.
  PlateauScheduler t(cfg);
  t.step(1.0);
  for (int e = 0; e < 5; ++e) t.step(0.999);
  CHECK(t.learning_rate() == 1e-3);
  CHECK(t.step(0.998) == doctest::Approx(9e-4).epsilon(1e-15));
}

TEST_CASE("early stop traces") {
  OptimizerConfig cfg;
  std::vector<double> h;
  for (int e = 1; e <= 200; ++e) {
    h.push_back(1000.0 - e);
    CHECK(early_stop(h, cfg) == (e == 200));
  }

  std::vector<double> flat = {9, 8, 7, 6, 5};
  for (int e = 6; e <= 24; ++e) {
    flat.push_back(5);
    CHECK_FALSE(early_stop(flat, cfg));
  }
  flat.push_back(5);
  CHECK(flat.size() == 25);
  CHECK(early_stop(flat, cfg));

  std::vector<double> shorter(10, 1.0);
  CHECK_FALSE(early_stop(shorter, cfg));
  std::vector<double> window(20, 1.0);
  CHECK_FALSE(early_stop(window, cfg));
}
