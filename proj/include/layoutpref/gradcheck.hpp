#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "layoutpref/policy.hpp"

namespace layoutpref {

using LossFn = std::function<double(const PolicyParams&)>;

inline constexpr std::size_t kDefaultProbeCount = 256;
inline constexpr double kGradFloor = 1e-6;

/// Distinct coordinates drawn without replacement from [0, size).
std::vector<std::size_t> probe_indices(std::size_t size, std::size_t count, std::uint64_t seed);

/// Max over the probed coordinates of |analytic - central difference| /
/// max(|analytic|, |central difference|, kGradFloor).
double finite_diff_check(const LossFn& loss, const PolicyParams& params,
                         const PolicyParams& analytic_grad, double eps,
                         const std::vector<std::size_t>& probes);

double finite_diff_check(const LossFn& loss, const PolicyParams& params,
                         const PolicyParams& analytic_grad, double eps,
                         std::uint64_t seed = 0, std::size_t probe_count = kDefaultProbeCount);

}  // namespace layoutpref
