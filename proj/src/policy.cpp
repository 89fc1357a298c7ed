#include "layoutpref/policy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "layoutpref/error.hpp"
#include "layoutpref/random.hpp"

namespace layoutpref {
namespace {

double dot_row(std::span<const double> row, const FeatureVector& phi) {
  double z = row[kFeatureDim];
  for (std::size_t j = 0; j < kFeatureDim; ++j) z += row[j] * phi[j];
  return z;
}

// In-place softmax; returns log of the normalizer of the shifted logits.
double softmax_inplace(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : z) v /= s;
  return m + std::log(s);
}

void check_tokens(const PolicyParams& params, std::span<const FeatureVector> features,
                  std::span<const int> tokens) {
  if (tokens.size() != kNumHeads * features.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(tokens.size()) + " tokens for " + std::to_string(features.size()) +
                    " elements");
  }
  for (int t : tokens) {
    if (t < 0 || t > params.bins()) {
      throw Error(ErrorCode::kTokenOutOfRange, "token " + std::to_string(t) + " out of range");
    }
  }
}

// Adds scale * d log p(tokens) / d params to grad.
void accumulate_log_prob_grad(const PolicyParams& params, std::span<const FeatureVector> features,
                              std::span<const int> tokens, double scale, PolicyParams& grad) {
  for (std::size_t i = 0; i < features.size(); ++i) {
    const FeatureVector& phi = features[i];
    for (std::size_t h = 0; h < kNumHeads; ++h) {
      std::vector<double> p = head_logits(params, h, phi);
      softmax_inplace(p);
      const auto target = static_cast<std::size_t>(tokens[kNumHeads * i + h]);
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double coeff = scale * ((k == target ? 1.0 : 0.0) - p[k]);
        if (coeff == 0.0) continue;
        auto row = grad.row(h, k);
        for (std::size_t j = 0; j < kFeatureDim; ++j) row[j] += coeff * phi[j];
        row[kFeatureDim] += coeff;
      }
    }
  }
}

double log_sigmoid(double z) {
  // log(1 / (1 + exp(-z))) without overflow.
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::vector<FeatureVector> featurize(const Canvas& canvas, std::span<const Element> elements,
                                     const KnownPositions& known, int bins) {
  const auto predicted = predicted_elements(elements);
  const auto count = static_cast<double>(predicted.size());
  const double aspect =
      canvas.valid() ? std::log(std::clamp(canvas.width / canvas.height, 0.25, 4.0)) : 0.0;

  std::vector<FeatureVector> out;
  out.reserve(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const Element& e = predicted[i];
    FeatureVector phi{};
    phi[static_cast<std::size_t>(e.kind)] = 1.0;
    phi[4] = e.intrinsic_aspect.value_or(1.0);
    phi[5] = static_cast<double>(i) / count;
    phi[6] = std::min(count / 32.0, 1.0);
    phi[7] = aspect;
    if (auto it = known.find(e.id); it != known.end()) {
      phi[8] = 1.0;
      for (std::size_t k = 0; k < 4; ++k) phi[9 + k] = static_cast<double>(it->second[k]) / bins;
    }
    out.push_back(phi);
  }
  return out;
}

PolicyParams::PolicyParams(int bins) : bins_(bins) {
  if (bins < 1) throw Error(ErrorCode::kInvalidArgument, "policy needs at least one bin");
  values_.assign(kNumHeads * vocab() * kRowWidth, 0.0);
}

std::span<double> PolicyParams::row(std::size_t head, std::size_t token) {
  return std::span<double>(values_).subspan((head * vocab() + token) * kRowWidth, kRowWidth);
}

std::span<const double> PolicyParams::row(std::size_t head, std::size_t token) const {
  return std::span<const double>(values_).subspan((head * vocab() + token) * kRowWidth, kRowWidth);
}

void randomize(PolicyParams& params, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  for (double& v : params.values()) v = normal(rng);
}

std::vector<double> head_logits(const PolicyParams& params, std::size_t head,
                                const FeatureVector& phi) {
  std::vector<double> z(params.vocab());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = dot_row(params.row(head, k), phi);
  return z;
}

double log_prob(const PolicyParams& params, std::span<const FeatureVector> features,
                std::span<const int> tokens) {
  check_tokens(params, features, tokens);
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t h = 0; h < kNumHeads; ++h) {
      std::vector<double> z = head_logits(params, h, features[i]);
      const double target = z[static_cast<std::size_t>(tokens[kNumHeads * i + h])];
      const double m = *std::max_element(z.begin(), z.end());
      double s = 0.0;
      for (double v : z) s += std::exp(v - m);
      total += target - m - std::log(s);
    }
  }
  return std::min(total, 0.0);
}

TokenizedLayout sample(const PolicyParams& params, std::span<const FeatureVector> features,
                       double temperature, std::uint64_t seed) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  std::mt19937_64 rng(seed);
  TokenizedLayout out;
  out.bins = params.bins();
  out.tokens.reserve(kNumHeads * features.size());
  for (const auto& phi : features) {
    for (std::size_t h = 0; h < kNumHeads; ++h) {
      std::vector<double> z = head_logits(params, h, phi);
      const double m = *std::max_element(z.begin(), z.end());
      for (double& v : z) v = (v - m) / temperature;
      softmax_inplace(z);
      const double u = uniform01(rng);
      double acc = 0.0;
      std::size_t pick = z.size() - 1;
      for (std::size_t k = 0; k < z.size(); ++k) {
        acc += z[k];
        if (u < acc) {
          pick = k;
          break;
        }
      }
      out.tokens.push_back(static_cast<int>(pick));
    }
  }
  return out;
}

TokenizedLayout greedy(const PolicyParams& params, std::span<const FeatureVector> features) {
  TokenizedLayout out;
  out.bins = params.bins();
  for (const auto& phi : features) {
    for (std::size_t h = 0; h < kNumHeads; ++h) {
      const std::vector<double> z = head_logits(params, h, phi);
      out.tokens.push_back(static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin()));
    }
  }
  return out;
}

LossAndGrad ce_loss_and_grad(const PolicyParams& params, std::span<const PolicyExample> batch) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyDataset, "empty cross-entropy batch");
  LossAndGrad out{0.0, PolicyParams(params.bins())};
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    out.loss -= log_prob(params, ex.features, ex.tokens) * inv;
    accumulate_log_prob_grad(params, ex.features, ex.tokens, -inv, out.grad);
  }
  return out;
}

LossAndGrad aapa_loss_and_grad(const PolicyParams& params, const PolicyParams& reference,
                               std::span<const PreferenceExample> batch, double beta) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyDataset, "empty preference batch");
  if (!(beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be positive");
  if (reference.bins() != params.bins()) {
    throw Error(ErrorCode::kShapeMismatch, "reference and policy use different bin counts");
  }
  LossAndGrad out{0.0, PolicyParams(params.bins())};
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& pair : batch) {
    if (pair.winner.size() != pair.loser.size()) {
      throw Error(ErrorCode::kLengthMismatch, "winner and loser token counts differ");
    }
    const double z = implicit_reward_margin(params, reference, pair, beta);
    out.loss -= log_sigmoid(z) * inv;
    // d(-log sigmoid(z))/dz = -sigmoid(-z); dz/dparams = beta (grad log pi(w) - grad log pi(l)).
    const double scale = -sigmoid(-z) * beta * inv;
    accumulate_log_prob_grad(params, pair.features, pair.winner, scale, out.grad);
    accumulate_log_prob_grad(params, pair.features, pair.loser, -scale, out.grad);
  }
  return out;
}

double implicit_reward_margin(const PolicyParams& params, const PolicyParams& reference,
                              const PreferenceExample& pair, double beta) {
  const double winner_ratio =
      log_prob(params, pair.features, pair.winner) - log_prob(reference, pair.features, pair.winner);
  const double loser_ratio =
      log_prob(params, pair.features, pair.loser) - log_prob(reference, pair.features, pair.loser);
  return beta * (winner_ratio - loser_ratio);
}

}  // namespace layoutpref
