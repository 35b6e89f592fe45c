#include "astcost/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "astcost/errors.hpp"

namespace astcost::nn {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(decay_factor > 0.0 && decay_factor < 1.0)) throw std::invalid_argument("decay_factor must be in (0, 1)");
  if (!(min_learning_rate <= learning_rate)) throw std::invalid_argument("min_learning_rate exceeds learning_rate");
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
  if (early_stop_patience == 0 || patience_epochs == 0) throw std::invalid_argument("patience must be positive");
}

void adam_step(std::span<Parameter* const> params, const OptimizerConfig& config, double learning_rate) {
  for (Parameter* p : params) {
    if (p->grad.shape() != p->value.shape()) throw ShapeError("adam_step: gradient of " + p->name + " not allocated");
    if (p->adam_m.shape() != p->value.shape()) p->adam_m = Tensor::zeros_like(p->value);
    if (p->adam_v.shape() != p->value.shape()) p->adam_v = Tensor::zeros_like(p->value);
    ++p->step_count;
    const double t = static_cast<double>(p->step_count);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    double* w = p->value.data();
    const double* g = p->grad.data();
    double* m = p->adam_m.data();
    double* v = p->adam_v.data();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    ensure_finite(p->value, "adam_step");
  }
}

PlateauScheduler::PlateauScheduler(const OptimizerConfig& config) : config_(config), lr_(config.learning_rate) {
  config_.validate();
}

double PlateauScheduler::step(double validation_loss) {
  if (validation_loss < (1.0 - config_.relative_improvement) * best_) {
    best_ = validation_loss;
    stale_ = 0;
  } else if (++stale_ >= config_.patience_epochs) {
    lr_ = std::max(lr_ * config_.decay_factor, config_.min_learning_rate);
    stale_ = 0;
  }
  return lr_;
}

bool early_stop(std::span<const double> history, const OptimizerConfig& config) {
  if (history.size() >= config.max_epochs) return true;
  const std::size_t window = config.early_stop_patience;
  if (history.size() <= window) return false;
  const auto split = history.end() - static_cast<std::ptrdiff_t>(window);
  const double recent = *std::min_element(split, history.end());
  const double before = *std::min_element(history.begin(), split);
  return recent >= before;
}

}  // namespace astcost::nn
