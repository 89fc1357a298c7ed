#include "layoutpref/train.hpp"

#include <random>

#include "layoutpref/error.hpp"
#include "layoutpref/random.hpp"

namespace layoutpref {
namespace {

template <class Example, class LossFn>
double run(PolicyParams& params, std::span<const Example> data, const TrainConfig& cfg,
           const StepCallback& on_step, LossFn loss_fn) {
  if (data.empty()) throw Error(ErrorCode::kEmptyDataset, "no training examples");
  if (cfg.steps < 1 || cfg.batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "steps and batch size must be positive");
  }
  std::mt19937_64 rng(mix_seed(cfg.seed, 0x7A11));
  AdamWState state;
  AdamWConfig opt;
  opt.weight_decay = cfg.weight_decay;
  std::vector<Example> batch(static_cast<std::size_t>(cfg.batch_size));
  double loss = 0.0;
  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    for (auto& ex : batch) {
      ex = data[static_cast<std::size_t>(rng() % data.size())];
    }
    LossAndGrad lg = loss_fn(params, std::span<const Example>(batch));
    const double lr = lr_schedule(step, cfg.steps, cfg.lr, cfg.warmup_ratio);
    adamw_step(params.values(), lg.grad.values(), state, lr, opt);
    loss = lg.loss;
    if (on_step) on_step({step, lr, loss});
  }
  return loss;
}

}  // namespace

std::vector<PolicyExample> make_ce_examples(const std::vector<DatasetSample>& samples, int bins) {
  std::vector<PolicyExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const Layout gt = s.ground_truth();
    const auto elements = s.element_list();
    out.push_back({featurize(s.canvas, elements, {}, bins), tokenize_layout(gt, bins).tokens});
  }
  return out;
}

double train_ce(PolicyParams& params, std::span<const PolicyExample> data, const TrainConfig& cfg,
                const StepCallback& on_step) {
  return run(params, data, cfg, on_step,
             [](const PolicyParams& p, std::span<const PolicyExample> b) {
               return ce_loss_and_grad(p, b);
             });
}

double train_aapa(PolicyParams& params, const PolicyParams& reference,
                  std::span<const PreferenceExample> data, const TrainConfig& cfg,
                  const StepCallback& on_step) {
  return run(params, data, cfg, on_step,
             [&](const PolicyParams& p, std::span<const PreferenceExample> b) {
               return aapa_loss_and_grad(p, reference, b, cfg.beta);
             });
}

}  // namespace layoutpref
