#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "layoutpref/dataio.hpp"
#include "layoutpref/judge.hpp"
#include "layoutpref/layout.hpp"
#include "layoutpref/policy.hpp"

namespace layoutpref {

enum class EvalMode { kAll, kSingle, kMultiple };

EvalMode parse_eval_mode(std::string_view name);
std::string_view to_string(EvalMode mode);

struct EvalInstance {
  std::string id;
  double score = 0.0;
};

struct EvalReport {
  EvalMode mode = EvalMode::kAll;
  double mean_iou_percent = 0.0;
  std::size_t n_instances = 0;
  std::optional<double> win_rate_percent;
  /// Samples with nothing to predict in this mode.
  std::size_t skipped_samples = 0;
  /// Samples whose judge call failed (win rate only).
  std::size_t failures = 0;
  std::vector<EvalInstance> instances;

  /// One-line machine-readable summary.
  std::string summary_line() const;
};

/// Produces a full layout for a sample. Elements named in `known` must be
/// placed at those positions; the rest are predicted from the canvas and
/// element list.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Layout predict(const DatasetSample& sample, const KnownPositions& known) const = 0;
};

/// Greedy decoding of a policy; known elements keep their given tokens.
class PolicyPredictor : public Predictor {
 public:
  explicit PolicyPredictor(const PolicyParams& params) : params_(params) {}
  Layout predict(const DatasetSample& sample, const KnownPositions& known) const override;

 private:
  const PolicyParams& params_;
};

/// Returns the ground-truth layout unchanged.
class GroundTruthPredictor : public Predictor {
 public:
  Layout predict(const DatasetSample& sample, const KnownPositions& known) const override;
};

struct EvalOptions {
  int bins = kDefaultBins;  // grid used to pass known positions
  int threads = 1;
};

/// Macro-averaged IoU x 100. ALL: instance = sample, score = mean IoU over its
/// non-background elements. SINGLE: instance = (sample, text element), others
/// known. MULTIPLE: instance = sample, non-text elements known, score = mean
/// IoU over its text elements. Throws Error(kSchemaError) when a sample lacks
/// ground truth and Error(kEmptyDataset) when no instance exists.
EvalReport mean_iou(const std::vector<DatasetSample>& samples, const Predictor& predictor,
                    EvalMode mode, const EvalOptions& options = {});

/// Percentage of samples on which the judge prefers the prediction (shown
/// first) over the ground truth (shown second). Failed judge calls are
/// counted and excluded from the denominator; throws Error(kJudgeUnavailable)
/// when every call fails.
EvalReport win_rate(const std::vector<DatasetSample>& samples, const Predictor& predictor,
                    Judge& judge, const EvalOptions& options = {});

/// `instance_id,score` rows in instance order.
void write_instances_csv(const EvalReport& report, const std::filesystem::path& path);

}  // namespace layoutpref
