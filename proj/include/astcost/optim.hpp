#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "astcost/tensor.hpp"

namespace astcost::nn {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double decay_factor = 0.9;
  std::size_t patience_epochs = 6;
  double relative_improvement = 0.01;
  double min_learning_rate = 1e-6;
  std::size_t max_epochs = 200;
  std::size_t early_stop_patience = 20;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// One Adam update with bias correction on every parameter. Gradients are
/// left in place.
void adam_step(std::span<Parameter* const> params, const OptimizerConfig& config, double learning_rate);

/// Patience-based learning-rate decay.
///
/// An epoch counts as an improvement when its loss is below
/// (1 - relative_improvement) times the reference loss; the reference only
/// moves on an improvement, so slow steady progress accumulates until it
/// clears the threshold. After `patience_epochs` consecutive epochs without
/// improvement the rate is multiplied by `decay_factor` (floored at
/// `min_learning_rate`) and the window starts over.
class PlateauScheduler {
 public:
  explicit PlateauScheduler(const OptimizerConfig& config);

  /// Feeds one epoch's validation loss; returns the rate for the next epoch.
  double step(double validation_loss);

  double learning_rate() const { return lr_; }
  std::size_t epochs_without_improvement() const { return stale_; }

 private:
  OptimizerConfig config_;
  double lr_;
  double best_ = std::numeric_limits<double>::infinity();  // reference loss
  std::size_t stale_ = 0;
};

/// True when the minimum of the last `early_stop_patience` losses is not
/// below the minimum of all earlier losses, or when `max_epochs` entries
/// exist. Histories no longer than the window return false.
bool early_stop(std::span<const double> history, const OptimizerConfig& config);

}  // namespace astcost::nn
