#include "relex/nn/optimizer.hpp"

#include <cmath>

namespace relex::nn {

double AdamOptimizer::lr_at(long step) const {
  if (cfg_.warmup_steps > 0 && step <= cfg_.warmup_steps) {
    return cfg_.peak_lr * static_cast<double>(step) /
           static_cast<double>(cfg_.warmup_steps);
  }
  if (cfg_.total_steps <= cfg_.warmup_steps) return cfg_.peak_lr;
  const double remaining = static_cast<double>(cfg_.total_steps - step);
  const double span = static_cast<double>(cfg_.total_steps - cfg_.warmup_steps);
  return cfg_.peak_lr * std::max(0.0, remaining / span);
}

void AdamOptimizer::step(const std::vector<Parameter*>& params) {
  ++step_;
  const double lr = lr_at(step_);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (Parameter* p : params) {
    if (!p->trainable || p->grad.size() == 0) continue;
    if (p->adam_m.size() == 0) {
      p->adam_m = Matrix::Zero(p->value.rows(), p->value.cols());
      p->adam_v = Matrix::Zero(p->value.rows(), p->value.cols());
    }
    p->adam_m = cfg_.beta1 * p->adam_m + (1.0 - cfg_.beta1) * p->grad;
    p->adam_v.array() = cfg_.beta2 * p->adam_v.array() +
                        (1.0 - cfg_.beta2) * p->grad.array().square();
    const Matrix m_hat = p->adam_m / bc1;
    const Matrix v_hat = p->adam_v / bc2;
    p->value.array() -=
        lr * (m_hat.array() / (v_hat.array().sqrt() + cfg_.eps));
    if (cfg_.weight_decay > 0.0 && p->decay) {
      p->value -= lr * cfg_.weight_decay * p->value;
    }
    p->grad.setZero();
  }
}

}  // namespace relex::nn
