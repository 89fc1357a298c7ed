#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "layoutpref/dataio.hpp"
#include "layoutpref/judge.hpp"
#include "layoutpref/layout.hpp"
#include "layoutpref/policy.hpp"

namespace layoutpref {

enum class Provenance { kModelVsGroundTruth, kModelVsModel };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view name);

struct PairingConfig {
  double p_gt = 0.5;
  int candidates_per_input = 2;
  /// Pairs attempted per input sample.
  int attempts_per_input = 1;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  bool apply_quality_filter = true;
  int threads = 1;
};

/// Throws Error(kInvalidArgument) for out-of-range fields.
void validate(const PairingConfig& cfg);

struct PreferencePair {
  std::string sample_id;
  Provenance provenance = Provenance::kModelVsModel;
  std::string judge_id;
  TokenizedLayout winner;
  TokenizedLayout loser;
  Canvas canvas;
  std::vector<Element> elements;

  bool operator==(const PreferencePair&) const = default;
};

nlohmann::ordered_json to_json(const PreferencePair& pair);
PreferencePair pair_from_json(const nlohmann::json& record);

/// Loads a pair file. Throws Error(kIoError) when the file carries the
/// partial-write marker and Error(kParseError) naming the line otherwise.
std::vector<PreferencePair> load_pairs(const std::filesystem::path& path);

/// Policy inputs for training on a pair.
PreferenceExample to_example(const PreferencePair& pair);

struct Candidate {
  TokenizedLayout tokens;
  Layout layout;
};

/// candidates_per_input tempered samples for one input. `stream` selects an
/// independent random stream (the pairing attempt).
std::vector<Candidate> sample_candidates(const PolicyParams& params, const DatasetSample& sample,
                                         const PairingConfig& cfg, std::uint64_t stream = 0);

std::vector<Layout> generate_candidates(const PolicyParams& params, const DatasetSample& sample,
                                        const PairingConfig& cfg);

/// Two layouts about to be judged, before filtering.
struct PairDraft {
  Provenance provenance = Provenance::kModelVsModel;
  Candidate first;
  Candidate second;
};

/// Skip reasons reported in the summary.
inline constexpr std::string_view kSkipIdentical = "identical-layouts";
inline constexpr std::string_view kSkipBelowThreshold = "below-threshold";
inline constexpr std::string_view kSkipDegenerate = "degenerate-element";
inline constexpr std::string_view kSkipNoGroundTruth = "no-ground-truth";

struct PairOutcome {
  std::optional<PreferencePair> pair;
  std::string skip_reason;  // empty when a pair was produced
};

/// Draws the pairing branch and the two members for one attempt.
/// A ground-truth member is tokenized and detokenized so both members live
/// on the same position grid.
PairDraft draw_pair(const PolicyParams& params, const DatasetSample& sample,
                    const PairingConfig& cfg, std::mt19937_64& rng, std::uint64_t stream = 0);

/// Filters (when `threshold` is set) and adjudicates one draft. Judge
/// failures propagate.
PairOutcome build_pair(const DatasetSample& sample, const PairDraft& draft, Judge& judge,
                       std::optional<double> threshold);

/// Convenience single-sample form: draws and adjudicates with a filter
/// threshold supplied by the caller.
PairOutcome build_pair(const DatasetSample& sample, const PolicyParams& params, Judge& judge,
                       const PairingConfig& cfg, std::mt19937_64& rng,
                       std::optional<double> threshold = std::nullopt);

struct PairingSummary {
  std::int64_t attempts = 0;
  std::int64_t kept = 0;
  std::map<std::string, std::int64_t> skipped;
  std::map<std::string, std::int64_t> provenance;  // kept pairs by provenance
  std::int64_t judge_calls = 0;
  std::int64_t cache_hits = 0;
  std::optional<double> threshold;

  std::int64_t skipped_total() const;
  nlohmann::ordered_json to_json() const;
};

/// Two passes: draws every attempt's pair and computes the quality threshold
/// over all members drawn in this run, then filters, judges and streams the
/// surviving pairs to `out` in sample order. On a write failure a marker line
/// is appended and Error(kIoError) is thrown.
PairingSummary build_dataset(const std::vector<DatasetSample>& samples, const PolicyParams& params,
                             Judge& judge, const PairingConfig& cfg,
                             const std::filesystem::path& out, DecisionCache* cache = nullptr);

}  // namespace layoutpref
