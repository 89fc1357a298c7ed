#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "layoutpref/layout.hpp"

namespace layoutpref {

/// Per-element input features of the layout policy:
///   [0..3]  one-hot element kind
///   [4]     intrinsic aspect (1 when unknown)
///   [5]     element index / element count
///   [6]     min(element count / 32, 1)
///   [7]     log of the canvas aspect W/H clipped to [0.25, 4]
///   [8]     known-position flag
///   [9..12] known box tokens / bins (zeros when unknown)
inline constexpr std::size_t kFeatureDim = 13;
using FeatureVector = std::array<double, kFeatureDim>;

/// One vector per non-background element, in order.
std::vector<FeatureVector> featurize(const Canvas& canvas, std::span<const Element> elements,
                                     const KnownPositions& known = {}, int bins = kDefaultBins);

enum class Head : std::size_t { kX = 0, kY = 1, kW = 2, kH = 3 };
inline constexpr std::size_t kNumHeads = 4;

/// Factorized linear-softmax policy: four heads (x, y, w, h), each mapping a
/// feature vector to logits over the bins + 1 position tokens. Rows are stored
/// as kFeatureDim weights followed by one bias.
class PolicyParams {
 public:
  static constexpr std::size_t kRowWidth = kFeatureDim + 1;

  PolicyParams() : PolicyParams(kDefaultBins) {}
  explicit PolicyParams(int bins);

  int bins() const { return bins_; }
  std::size_t vocab() const { return static_cast<std::size_t>(bins_) + 1; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::span<double> row(std::size_t head, std::size_t token);
  std::span<const double> row(std::size_t head, std::size_t token) const;

  double sampling_temperature = 1.0;

  bool operator==(const PolicyParams&) const = default;

 private:
  int bins_;
  std::vector<double> values_;
};

/// Fills every parameter with N(0, scale^2) draws from a seeded generator.
void randomize(PolicyParams& params, std::uint64_t seed, double scale);

/// Logits of one head for one element.
std::vector<double> head_logits(const PolicyParams& params, std::size_t head,
                                const FeatureVector& phi);

/// Sum of token log-probabilities; tokens grouped (x, y, w, h) per element.
double log_prob(const PolicyParams& params, std::span<const FeatureVector> features,
                std::span<const int> tokens);

/// Independent draws from the tempered softmax of every head.
TokenizedLayout sample(const PolicyParams& params, std::span<const FeatureVector> features,
                       double temperature, std::uint64_t seed);

/// Argmax decoding (lowest token index on ties).
TokenizedLayout greedy(const PolicyParams& params, std::span<const FeatureVector> features);

struct PolicyExample {
  std::vector<FeatureVector> features;
  std::vector<int> tokens;
};

struct PreferenceExample {
  std::vector<FeatureVector> features;
  std::vector<int> winner;
  std::vector<int> loser;
};

struct LossAndGrad {
  double loss = 0.0;
  PolicyParams grad;
};

/// Mean over the batch of the summed token cross-entropy, with its gradient.
LossAndGrad ce_loss_and_grad(const PolicyParams& params, std::span<const PolicyExample> batch);

inline constexpr double kDefaultBeta = 0.1;

/// Mean preference loss -log sigmoid(beta * (winner log-ratio - loser log-ratio))
/// against the frozen reference. The gradient is taken w.r.t. params only.
LossAndGrad aapa_loss_and_grad(const PolicyParams& params, const PolicyParams& reference,
                               std::span<const PreferenceExample> batch,
                               double beta = kDefaultBeta);

/// beta * ((log pi(w) - log ref(w)) - (log pi(l) - log ref(l))).
double implicit_reward_margin(const PolicyParams& params, const PolicyParams& reference,
                              const PreferenceExample& pair, double beta = kDefaultBeta);

}  // namespace layoutpref
