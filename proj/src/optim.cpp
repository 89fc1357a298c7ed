#include "layoutpref/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "layoutpref/error.hpp"

namespace layoutpref {

void adamw_step(std::span<double> params, std::span<const double> grad, AdamWState& state,
                double lr, const AdamWConfig& cfg) {
  if (params.size() != grad.size()) {
    throw Error(ErrorCode::kShapeMismatch, "parameter and gradient sizes differ");
  }
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer state does not match parameters");
  }
  ++state.step;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] -= lr * cfg.weight_decay * params[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

double lr_schedule(std::int64_t step, std::int64_t total_steps, double base_lr,
                   double warmup_ratio) {
  if (total_steps <= 0) return base_lr;
  step = std::clamp<std::int64_t>(step, 0, total_steps);
  const auto warmup = static_cast<std::int64_t>(
      std::ceil(warmup_ratio * static_cast<double>(total_steps)));
  if (step < warmup) return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  if (total_steps == warmup) return base_lr;
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace layoutpref
