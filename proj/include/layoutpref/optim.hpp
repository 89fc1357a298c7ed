#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace layoutpref {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

/// Decoupled weight decay Adam update, in place. Throws Error(kShapeMismatch)
/// when params, grad and a non-empty state disagree in size.
void adamw_step(std::span<double> params, std::span<const double> grad, AdamWState& state,
                double lr, const AdamWConfig& cfg = {});

/// Linear warmup over ceil(warmup_ratio * total_steps) steps to base_lr, then
/// cosine decay reaching 0 at total_steps.
double lr_schedule(std::int64_t step, std::int64_t total_steps, double base_lr,
                   double warmup_ratio);

}  // namespace layoutpref
