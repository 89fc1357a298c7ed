#include "layoutpref/preference.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "layoutpref/error.hpp"
#include "layoutpref/metrics.hpp"
#include "layoutpref/parallel.hpp"
#include "layoutpref/random.hpp"

namespace layoutpref {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t id_hash(std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Candidate ground_truth_candidate(const DatasetSample& sample, int bins) {
  if (!sample.has_ground_truth()) {
    throw Error(ErrorCode::kSchemaError, "sample " + sample.id + " has no ground truth");
  }
  Candidate c;
  c.tokens = tokenize_layout(sample.ground_truth(), bins);
  const auto elements = sample.element_list();
  c.layout = detokenize_layout(c.tokens, elements, sample.canvas);
  return c;
}

struct Drafted {
  std::optional<PairDraft> draft;
  std::string skip_reason;
  double q_first = 0.0;
  double q_second = 0.0;
};

}  // namespace

std::string_view to_string(Provenance p) {
  return p == Provenance::kModelVsGroundTruth ? "model-vs-gt" : "model-vs-model";
}

Provenance parse_provenance(std::string_view name) {
  if (name == "model-vs-gt") return Provenance::kModelVsGroundTruth;
  if (name == "model-vs-model") return Provenance::kModelVsModel;
  throw Error(ErrorCode::kParseError, "unknown provenance '" + std::string(name) + "'");
}

void validate(const PairingConfig& cfg) {
  if (!(cfg.p_gt >= 0.0 && cfg.p_gt <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "p_gt must lie in [0, 1]");
  }
  if (cfg.candidates_per_input < 2) {
    throw Error(ErrorCode::kInvalidArgument, "candidates_per_input must be at least 2");
  }
  if (cfg.attempts_per_input < 1) {
    throw Error(ErrorCode::kInvalidArgument, "attempts_per_input must be at least 1");
  }
  if (!(cfg.temperature > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  }
}

ordered_json to_json(const PreferencePair& pair) {
  ordered_json rec;
  rec["sample_id"] = pair.sample_id;
  rec["provenance"] = to_string(pair.provenance);
  rec["judge_id"] = pair.judge_id;
  rec["bins"] = pair.winner.bins;
  rec["winner_tokens"] = pair.winner.tokens;
  rec["loser_tokens"] = pair.loser.tokens;
  rec["canvas"] = {{"w", pair.canvas.width}, {"h", pair.canvas.height}};
  auto& descriptors = rec["element_descriptors"] = ordered_json::array();
  for (const auto& e : pair.elements) descriptors.push_back(element_descriptor(e));
  return rec;
}

PreferencePair pair_from_json(const json& record) {
  PreferencePair p;
  try {
    p.sample_id = record.at("sample_id").get<std::string>();
    p.provenance = parse_provenance(record.at("provenance").get<std::string>());
    p.judge_id = record.at("judge_id").get<std::string>();
    const int bins = record.value("bins", kDefaultBins);
    p.winner = {record.at("winner_tokens").get<std::vector<int>>(), bins};
    p.loser = {record.at("loser_tokens").get<std::vector<int>>(), bins};
    p.canvas = {record.at("canvas").at("w").get<double>(), record.at("canvas").at("h").get<double>()};
    for (const auto& d : record.at("element_descriptors")) p.elements.push_back(element_from_descriptor(d));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  const std::size_t expected = 4 * predicted_elements(p.elements).size();
  if (p.winner.tokens.size() != expected || p.loser.tokens.size() != expected) {
    throw Error(ErrorCode::kSchemaError, "token count does not match the element list");
  }
  return p;
}

std::vector<PreferencePair> load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<PreferencePair> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (rec.is_object() && rec.contains("partial")) {
      throw Error(ErrorCode::kIoError, path.string() + " is a partial pair file");
    }
    try {
      out.push_back(pair_from_json(rec));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

PreferenceExample to_example(const PreferencePair& pair) {
  return {featurize(pair.canvas, pair.elements, {}, pair.winner.bins), pair.winner.tokens,
          pair.loser.tokens};
}

std::vector<Candidate> sample_candidates(const PolicyParams& params, const DatasetSample& sample,
                                         const PairingConfig& cfg, std::uint64_t stream) {
  const auto elements = sample.element_list();
  const auto features = featurize(sample.canvas, elements, {}, params.bins());
  const std::uint64_t base = mix_seed(cfg.seed, id_hash(sample.id), stream);
  std::vector<Candidate> out;
  out.reserve(static_cast<std::size_t>(cfg.candidates_per_input));
  for (int c = 0; c < cfg.candidates_per_input; ++c) {
    Candidate cand;
    cand.tokens = layoutpref::sample(params, features, cfg.temperature, mix_seed(base, static_cast<std::uint64_t>(c)));
    cand.layout = detokenize_layout(cand.tokens, elements, sample.canvas);
    out.push_back(std::move(cand));
  }
  return out;
}

std::vector<Layout> generate_candidates(const PolicyParams& params, const DatasetSample& sample,
                                        const PairingConfig& cfg) {
  validate(cfg);
  std::vector<Layout> out;
  for (auto& c : sample_candidates(params, sample, cfg)) out.push_back(std::move(c.layout));
  return out;
}

PairDraft draw_pair(const PolicyParams& params, const DatasetSample& sample,
                    const PairingConfig& cfg, std::mt19937_64& rng, std::uint64_t stream) {
  // Always consume the same number of draws so the stream does not depend on the branch.
  const bool gt_branch = uniform01(rng) < cfg.p_gt;
  const bool swap = uniform01(rng) < 0.5;
  const int n = cfg.candidates_per_input;
  const int a = uniform_int(rng, 0, n - 1);
  int b = uniform_int(rng, 0, n - 2);
  if (b >= a) ++b;

  auto candidates = sample_candidates(params, sample, cfg, stream);
  PairDraft draft;
  draft.first = std::move(candidates[static_cast<std::size_t>(a)]);
  if (gt_branch) {
    draft.provenance = Provenance::kModelVsGroundTruth;
    draft.second = ground_truth_candidate(sample, params.bins());
  } else {
    draft.provenance = Provenance::kModelVsModel;
    draft.second = std::move(candidates[static_cast<std::size_t>(b)]);
  }
  if (swap) std::swap(draft.first, draft.second);
  return draft;
}

PairOutcome build_pair(const DatasetSample& sample, const PairDraft& draft, Judge& judge,
                       std::optional<double> threshold) {
  PairOutcome out;
  if (draft.first.tokens == draft.second.tokens) {
    out.skip_reason = kSkipIdentical;
    return out;
  }
  if (threshold) {
    try {
      if (!(quality(draft.first.layout).q > *threshold) ||
          !(quality(draft.second.layout).q > *threshold)) {
        out.skip_reason = kSkipBelowThreshold;
        return out;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateElement) throw;
      spdlog::debug("sample {}: {}", sample.id, e.what());
      out.skip_reason = kSkipDegenerate;
      return out;
    }
  }
  const JudgeDecision d = judge.compare(draft.first.layout, draft.second.layout);
  const bool first_wins = d.d == 1;
  PreferencePair pair;
  pair.sample_id = sample.id;
  pair.provenance = draft.provenance;
  pair.judge_id = d.judge_id.empty() ? judge.id() : d.judge_id;
  pair.winner = first_wins ? draft.first.tokens : draft.second.tokens;
  pair.loser = first_wins ? draft.second.tokens : draft.first.tokens;
  pair.canvas = sample.canvas;
  pair.elements = sample.element_list();
  out.pair = std::move(pair);
  return out;
}

PairOutcome build_pair(const DatasetSample& sample, const PolicyParams& params, Judge& judge,
                       const PairingConfig& cfg, std::mt19937_64& rng,
                       std::optional<double> threshold) {
  validate(cfg);
  if (cfg.p_gt > 0.0 && !sample.has_ground_truth()) {
    return {std::nullopt, std::string(kSkipNoGroundTruth)};
  }
  const PairDraft draft = draw_pair(params, sample, cfg, rng);
  return build_pair(sample, draft, judge, cfg.apply_quality_filter ? threshold : std::nullopt);
}

std::int64_t PairingSummary::skipped_total() const {
  std::int64_t n = 0;
  for (const auto& [reason, count] : skipped) n += count;
  return n;
}

ordered_json PairingSummary::to_json() const {
  ordered_json j;
  j["attempts"] = attempts;
  j["kept"] = kept;
  j["skipped"] = skipped;
  j["provenance"] = provenance;
  j["judge_calls"] = judge_calls;
  j["cache_hits"] = cache_hits;
  j["threshold"] = threshold ? json(*threshold) : json(nullptr);
  return j;
}

PairingSummary build_dataset(const std::vector<DatasetSample>& samples, const PolicyParams& params,
                             Judge& judge, const PairingConfig& cfg,
                             const std::filesystem::path& out, DecisionCache* cache) {
  validate(cfg);
  if (samples.empty()) throw Error(ErrorCode::kEmptyDataset, "no samples to pair");

  const auto per = static_cast<std::size_t>(cfg.attempts_per_input);
  const std::size_t total = samples.size() * per;

  // Pass 1: draw every attempt and score its members.
  std::vector<Drafted> drafted(total);
  parallel_for(total, cfg.threads, [&](std::size_t k) {
    const DatasetSample& s = samples[k / per];
    const std::uint64_t attempt = k % per;
    Drafted& slot = drafted[k];
    std::mt19937_64 rng(mix_seed(cfg.seed, id_hash(s.id), attempt + 0x5EED));
    // The branch draw is replayed inside draw_pair; peek at it here to catch
    // samples without ground truth before any work is done.
    std::mt19937_64 peek = rng;
    if (uniform01(peek) < cfg.p_gt && !s.has_ground_truth()) {
      slot.skip_reason = kSkipNoGroundTruth;
      return;
    }
    PairDraft draft = draw_pair(params, s, cfg, rng, attempt);
    if (draft.first.tokens == draft.second.tokens) {
      slot.skip_reason = kSkipIdentical;
      return;
    }
    try {
      slot.q_first = quality(draft.first.layout).q;
      slot.q_second = quality(draft.second.layout).q;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateElement) throw;
      spdlog::debug("sample {}: {}", s.id, e.what());
      slot.skip_reason = kSkipDegenerate;
      return;
    }
    slot.draft = std::move(draft);
  });

  PairingSummary summary;
  summary.attempts = static_cast<std::int64_t>(total);
  if (cfg.apply_quality_filter) {
    std::vector<double> pool;
    for (const auto& d : drafted) {
      if (!d.draft) continue;
      pool.push_back(d.q_first);
      pool.push_back(d.q_second);
    }
    if (!pool.empty()) summary.threshold = dataset_stats(pool).threshold;
  }

  // Pass 2: filter and judge.
  CachedJudge cached(judge, cache);
  Judge& active = cache != nullptr ? static_cast<Judge&>(cached) : judge;
  std::vector<PairOutcome> outcomes(total);
  std::atomic<std::int64_t> direct_calls{0};
  parallel_for(total, cfg.threads, [&](std::size_t k) {
    const Drafted& d = drafted[k];
    if (!d.draft) {
      outcomes[k].skip_reason = d.skip_reason;
      return;
    }
    if (summary.threshold && !(d.q_first > *summary.threshold && d.q_second > *summary.threshold)) {
      outcomes[k].skip_reason = kSkipBelowThreshold;
      return;
    }
    outcomes[k] = build_pair(samples[k / per], *d.draft, active, std::nullopt);
    ++direct_calls;
  });
  summary.judge_calls = cache != nullptr ? cached.underlying_calls() : direct_calls.load();
  summary.cache_hits = cache != nullptr ? cached.cache_hits() : 0;

  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIoError, "cannot open " + out.string() + " for writing");
  for (auto& o : outcomes) {
    if (!o.pair) {
      ++summary.skipped[o.skip_reason];
      continue;
    }
    file << to_json(*o.pair).dump() << '\n';
    if (!file) {
      file.clear();
      file << ordered_json{{"partial", true}, {"error", "write failed"}}.dump() << '\n';
      throw Error(ErrorCode::kIoError, "write to " + out.string() + " failed");
    }
    ++summary.kept;
    ++summary.provenance[std::string(to_string(o.pair->provenance))];
  }
  file.flush();
  if (!file) throw Error(ErrorCode::kIoError, "write to " + out.string() + " failed");
  return summary;
}

}  // namespace layoutpref
