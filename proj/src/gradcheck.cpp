#include "layoutpref/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "layoutpref/error.hpp"

namespace layoutpref {

std::vector<std::size_t> probe_indices(std::size_t size, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> all(size);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  count = std::min(count, size);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (size - i));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  return all;
}

double finite_diff_check(const LossFn& loss, const PolicyParams& params,
                         const PolicyParams& analytic_grad, double eps,
                         const std::vector<std::size_t>& probes) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  if (analytic_grad.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient shape differs from parameters");
  }
  PolicyParams work = params;
  double worst = 0.0;
  for (std::size_t idx : probes) {
    const double original = work.values()[idx];
    work.values()[idx] = original + eps;
    const double up = loss(work);
    work.values()[idx] = original - eps;
    const double down = loss(work);
    work.values()[idx] = original;
    const double numeric = (up - down) / (2.0 * eps);
    const double analytic = analytic_grad.values()[idx];
    // The floor sits well above central-difference roundoff (~1e-11 here),
    // so exactly-zero entries are judged on absolute error.
    const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

double finite_diff_check(const LossFn& loss, const PolicyParams& params,
                         const PolicyParams& analytic_grad, double eps, std::uint64_t seed,
                         std::size_t probe_count) {
  return finite_diff_check(loss, params, analytic_grad, eps,
                           probe_indices(params.size(), probe_count, seed));
}

}  // namespace layoutpref
