#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "layoutpref/dataio.hpp"
#include "layoutpref/optim.hpp"
#include "layoutpref/policy.hpp"

namespace layoutpref {

struct TrainConfig {
  std::int64_t steps = 2000;
  int batch_size = 32;
  double lr = 0.05;
  double warmup_ratio = 0.03;
  double weight_decay = 0.01;
  double beta = kDefaultBeta;  // preference training only
  std::uint64_t seed = 0;
};

struct StepLog {
  std::int64_t step = 0;  // 1-based
  double lr = 0.0;
  double loss = 0.0;  // before this step's update
};

using StepCallback = std::function<void(const StepLog&)>;

/// Ground-truth training targets, one per sample, on a `bins` grid.
std::vector<PolicyExample> make_ce_examples(const std::vector<DatasetSample>& samples, int bins);

/// Minibatch AdamW on the cross-entropy objective. Batches are drawn with
/// replacement from a generator seeded by cfg.seed. Step t uses the schedule
/// value at t; returns the last logged loss.
double train_ce(PolicyParams& params, std::span<const PolicyExample> data, const TrainConfig& cfg,
                const StepCallback& on_step = {});

/// As train_ce on the preference objective against a frozen reference.
double train_aapa(PolicyParams& params, const PolicyParams& reference,
                  std::span<const PreferenceExample> data, const TrainConfig& cfg,
                  const StepCallback& on_step = {});

}  // namespace layoutpref
