#include "layoutpref/eval.hpp"

#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "layoutpref/error.hpp"
#include "layoutpref/parallel.hpp"

namespace layoutpref {
namespace {

std::array<int, 4> box_tokens(const BBox& b, const Canvas& c, int bins) {
  return {bin(b.x, c.width, bins), bin(b.y, c.height, bins), bin(b.w, c.width, bins),
          bin(b.h, c.height, bins)};
}

const BBox& box_of(const Layout& layout, const std::string& id) {
  for (const auto& p : layout.placements) {
    if (p.element.id == id) return p.box;
  }
  throw Error(ErrorCode::kMalformedOutput, "prediction lacks element " + id);
}

bool is_text(const SampleElement& e) { return e.element.kind == ElementKind::kText; }

// Known positions for every predicted element except those matching `predict`.
template <class Pred>
KnownPositions known_except(const DatasetSample& s, int bins, Pred predict) {
  KnownPositions known;
  for (const auto& e : s.elements) {
    if (!is_predicted(e.element) || predict(e)) continue;
    known[e.element.id] = box_tokens(*e.gt_bbox, s.canvas, bins);
  }
  return known;
}

double mean_iou_over(const Layout& predicted, const std::vector<const SampleElement*>& targets) {
  double sum = 0.0;
  for (const auto* e : targets) sum += iou(box_of(predicted, e->element.id), *e->gt_bbox);
  return sum / static_cast<double>(targets.size());
}

}  // namespace

EvalMode parse_eval_mode(std::string_view name) {
  if (name == "all") return EvalMode::kAll;
  if (name == "single") return EvalMode::kSingle;
  if (name == "multiple") return EvalMode::kMultiple;
  throw Error(ErrorCode::kInvalidArgument, "unknown eval mode '" + std::string(name) + "'");
}

std::string_view to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::kAll: return "all";
    case EvalMode::kSingle: return "single";
    case EvalMode::kMultiple: return "multiple";
  }
  return "?";
}

std::string EvalReport::summary_line() const {
  std::string line = fmt::format("mode={} n_instances={} skipped_samples={}", to_string(mode),
                                 n_instances, skipped_samples);
  if (win_rate_percent) {
    line += fmt::format(" win_rate={:.4f} failures={}", *win_rate_percent, failures);
  } else {
    line += fmt::format(" miou={:.4f}", mean_iou_percent);
  }
  return line;
}

Layout PolicyPredictor::predict(const DatasetSample& sample, const KnownPositions& known) const {
  const auto elements = sample.element_list();
  const auto features = featurize(sample.canvas, elements, known, params_.bins());
  TokenizedLayout tokens = greedy(params_, features);
  std::size_t i = 0;
  for (const auto& e : elements) {
    if (!is_predicted(e)) continue;
    if (auto it = known.find(e.id); it != known.end()) {
      std::copy(it->second.begin(), it->second.end(), tokens.tokens.begin() + 4 * i);
    }
    ++i;
  }
  return detokenize_layout(tokens, elements, sample.canvas);
}

Layout GroundTruthPredictor::predict(const DatasetSample& sample, const KnownPositions&) const {
  return sample.ground_truth();
}

EvalReport mean_iou(const std::vector<DatasetSample>& samples, const Predictor& predictor,
                    EvalMode mode, const EvalOptions& options) {
  for (const auto& s : samples) {
    if (!s.has_ground_truth()) {
      throw Error(ErrorCode::kSchemaError, "sample " + s.id + " has no ground truth");
    }
  }
  // Per-sample instance lists, concatenated in sample order afterwards.
  std::vector<std::vector<EvalInstance>> per_sample(samples.size());
  parallel_for(samples.size(), options.threads, [&](std::size_t k) {
    const DatasetSample& s = samples[k];
    auto& out = per_sample[k];
    switch (mode) {
      case EvalMode::kAll: {
        std::vector<const SampleElement*> targets;
        for (const auto& e : s.elements) {
          if (is_predicted(e.element)) targets.push_back(&e);
        }
        if (targets.empty()) return;
        const Layout pred = predictor.predict(s, {});
        out.push_back({s.id, mean_iou_over(pred, targets)});
        break;
      }
      case EvalMode::kSingle: {
        for (const auto& t : s.elements) {
          if (!is_text(t)) continue;
          const auto known = known_except(s, options.bins, [&](const SampleElement& e) {
            return e.element.id == t.element.id;
          });
          const Layout pred = predictor.predict(s, known);
          out.push_back({s.id + "#" + t.element.id, mean_iou_over(pred, {&t})});
        }
        break;
      }
      case EvalMode::kMultiple: {
        std::vector<const SampleElement*> targets;
        for (const auto& e : s.elements) {
          if (is_text(e)) targets.push_back(&e);
        }
        if (targets.empty()) return;
        const Layout pred = predictor.predict(s, known_except(s, options.bins, is_text));
        out.push_back({s.id, mean_iou_over(pred, targets)});
        break;
      }
    }
  });

  EvalReport report;
  report.mode = mode;
  double sum = 0.0;
  for (auto& list : per_sample) {
    if (list.empty()) ++report.skipped_samples;
    for (auto& inst : list) {
      sum += inst.score;
      report.instances.push_back(std::move(inst));
    }
  }
  report.n_instances = report.instances.size();
  if (report.n_instances == 0) {
    throw Error(ErrorCode::kEmptyDataset, "no evaluable instances in mode " + std::string(to_string(mode)));
  }
  report.mean_iou_percent = 100.0 * sum / static_cast<double>(report.n_instances);
  return report;
}

EvalReport win_rate(const std::vector<DatasetSample>& samples, const Predictor& predictor,
                    Judge& judge, const EvalOptions& options) {
  // 1 / 0 for a decided sample, -1 for a failed judge call.
  std::vector<int> outcome(samples.size(), -1);
  parallel_for(samples.size(), options.threads, [&](std::size_t k) {
    const DatasetSample& s = samples[k];
    const Layout gt = s.ground_truth();
    const Layout pred = predictor.predict(s, {});
    try {
      outcome[k] = judge.compare(pred, gt).d == 1 ? 1 : 0;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kJudgeUnavailable) throw;
      spdlog::error("sample {}: {}", s.id, e.what());
    }
  });

  EvalReport report;
  report.mode = EvalMode::kAll;
  std::size_t wins = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (outcome[k] < 0) {
      ++report.failures;
      continue;
    }
    wins += static_cast<std::size_t>(outcome[k]);
    report.instances.push_back({samples[k].id, static_cast<double>(outcome[k])});
  }
  report.n_instances = report.instances.size();
  if (report.n_instances == 0) {
    throw Error(ErrorCode::kJudgeUnavailable, "every judge call failed");
  }
  if (report.failures > 0) {
    spdlog::warn("{} of {} judge calls failed and are excluded from the win rate", report.failures,
                 samples.size());
  }
  report.win_rate_percent = 100.0 * static_cast<double>(wins) / static_cast<double>(report.n_instances);
  return report;
}

void write_instances_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  out << "instance_id,score\n";
  for (const auto& inst : report.instances) out << fmt::format("{},{:.17g}\n", inst.id, inst.score);
  if (!out) throw Error(ErrorCode::kIoError, "write to " + path.string() + " failed");
}

}  // namespace layoutpref
