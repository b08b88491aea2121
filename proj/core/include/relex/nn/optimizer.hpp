#pragma once

#include <vector>

#include "relex/nn/parameters.hpp"

namespace relex::nn {

struct AdamConfig {
  double peak_lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;
  double weight_decay = 0.01;  // decoupled; skipped for params with decay=false
  long warmup_steps = 0;
  long total_steps = 0;  // 0: constant lr after warmup
};

// Adam with decoupled weight decay and a linear warmup + linear decay
// learning rate schedule.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig cfg) : cfg_(cfg) {}

  double lr_at(long step) const;  // 1-based step index
  double current_lr() const { return lr_at(step_ + 1); }
  long step_count() const { return step_; }

  // Applies accumulated gradients of all trainable parameters and zeroes
  // them afterwards.
  void step(const std::vector<Parameter*>& params);

 private:
  AdamConfig cfg_;
  long step_ = 0;
};

}  // namespace relex::nn
