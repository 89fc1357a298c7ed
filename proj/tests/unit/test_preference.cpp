#include <doctest.h>

#include <fstream>
#include <sstream>

#include "layoutpref/error.hpp"
#include "layoutpref/metrics.hpp"
#include "layoutpref/preference.hpp"
#include "support.hpp"

using namespace layoutpref;

namespace {

std::vector<DatasetSample> grid_corpus(int n, std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.n_samples = n;
  spec.seed = seed;
  return make_synthetic(spec);
}

// A policy putting all its mass on one token in every head.
PolicyParams peaked(int bins, int token) {
  PolicyParams p(bins);
  for (std::size_t h = 0; h < kNumHeads; ++h) p.row(h, static_cast<std::size_t>(token))[kFeatureDim] = 1000;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("candidates: count and seeding") {
  const auto s = grid_corpus(1)[0];
  const PolicyParams p(32);
  PairingConfig cfg;
  cfg.seed = 9;
  const auto a = generate_candidates(p, s, cfg);
  CHECK(a.size() == 2);
  CHECK(a == generate_candidates(p, s, cfg));
  cfg.candidates_per_input = 5;
  CHECK(generate_candidates(p, s, cfg).size() == 5);
  const auto c0 = sample_candidates(p, s, cfg, 0), c1 = sample_candidates(p, s, cfg, 1);
  CHECK(c0[0].tokens != c1[0].tokens);
}

TEST_CASE("config validation") {
  PairingConfig cfg;
  cfg.p_gt = 1.5;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.candidates_per_input = 1;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.temperature = 0;
  CHECK_THROWS_AS(validate(cfg), Error);
}

TEST_CASE("ground truth beats a misaligned model") {
  const auto corpus = grid_corpus(20);
  const PolicyParams p(224);  // uniform: scattered, overlapping boxes
  HeuristicJudge judge;
  PairingConfig cfg;
  cfg.p_gt = 1.0;
  std::mt19937_64 rng(3);
  int pairs = 0;
  for (const auto& s : corpus) {
    REQUIRE(quality(s.ground_truth()).q == doctest::Approx(1.0));
    const auto out = build_pair(s, p, judge, cfg, rng);
    REQUIRE(out.pair.has_value());
    CHECK(out.pair->provenance == Provenance::kModelVsGroundTruth);
    CHECK(out.pair->winner == tokenize_layout(s.ground_truth()));
    ++pairs;
  }
  CHECK(pairs == 20);
}

TEST_CASE("identical candidates are skipped") {
  const auto s = grid_corpus(1)[0];
  HeuristicJudge judge;
  PairingConfig cfg;
  cfg.p_gt = 0.0;
  std::mt19937_64 rng(1);
  const auto out = build_pair(s, peaked(32, 5), judge, cfg, rng);
  CHECK(!out.pair);
  CHECK(out.skip_reason == kSkipIdentical);
  CHECK(judge.calls() == 0);
}

TEST_CASE("threshold filter skips a weak member") {
  const auto s = grid_corpus(1)[0];
  HeuristicJudge judge;
  PairingConfig cfg;
  cfg.p_gt = 1.0;
  std::mt19937_64 rng(2);
  const PolicyParams p(224);
  const PairDraft draft = draw_pair(p, s, cfg, rng);
  const double lo = std::min(quality(draft.first.layout).q, quality(draft.second.layout).q);
  const auto skipped = build_pair(s, draft, judge, lo + 1e-9);
  CHECK(skipped.skip_reason == kSkipBelowThreshold);
  const auto kept = build_pair(s, draft, judge, lo - 1e-9);
  CHECK(kept.pair.has_value());
  CHECK(build_pair(s, draft, judge, std::nullopt).pair.has_value());
}

TEST_CASE("pair json round trip") {
  const auto s = grid_corpus(1)[0];
  HeuristicJudge judge;
  PairingConfig cfg;
  cfg.p_gt = 1.0;
  std::mt19937_64 rng(4);
  const auto out = build_pair(s, PolicyParams(16), judge, cfg, rng);
  REQUIRE(out.pair);
  const auto j = to_json(*out.pair);
  CHECK(j["provenance"] == "model-vs-gt");
  CHECK(j["bins"] == 16);
  CHECK(pair_from_json(nlohmann::json::parse(j.dump())) == *out.pair);
  const auto ex = to_example(*out.pair);
  CHECK(ex.winner == out.pair->winner.tokens);
  CHECK(ex.features.size() * 4 == ex.loser.size());
}

TEST_CASE("dataset build: accounting, provenance, cache replay") {
  testing::TempDir dir;
  const auto corpus = grid_corpus(100, 7);
  PolicyParams p(32);
  randomize(p, 5, 0.3);
  PairingConfig cfg;
  cfg.seed = 11;
  cfg.attempts_per_input = 2;
  HeuristicJudge judge;
  DecisionCache cache(dir / "cache.jsonl");
  const auto s1 = build_dataset(corpus, p, judge, cfg, dir / "a.jsonl", &cache);
  CHECK(s1.attempts == 200);
  CHECK(s1.kept + s1.skipped_total() == 200);
  CHECK(s1.judge_calls == s1.kept);
  REQUIRE(s1.threshold.has_value());
  std::int64_t by_prov = 0;
  for (const auto& [k, v] : s1.provenance) by_prov += v;
  CHECK(by_prov == s1.kept);
  const auto pairs = load_pairs(dir / "a.jsonl");
  CHECK(static_cast<std::int64_t>(pairs.size()) == s1.kept);

  const auto s2 = build_dataset(corpus, p, judge, cfg, dir / "b.jsonl", &cache);
  CHECK(s2.judge_calls == 0);
  CHECK(s2.cache_hits == s1.kept);
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));

  cfg.threads = 3;
  build_dataset(corpus, p, judge, cfg, dir / "c.jsonl");
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "c.jsonl"));

  cfg.p_gt = 0.0;
  const auto s3 = build_dataset(corpus, p, judge, cfg, dir / "d.jsonl");
  for (const auto& pr : load_pairs(dir / "d.jsonl")) CHECK(pr.provenance == Provenance::kModelVsModel);
  CHECK(s3.provenance.count("model-vs-gt") == 0);
  CHECK(s3.to_json()["attempts"] == 200);
}

TEST_CASE("samples without ground truth") {
  auto corpus = grid_corpus(3);
  corpus[1].elements[0].gt_bbox.reset();
  testing::TempDir dir;
  HeuristicJudge judge;
  PairingConfig cfg;
  cfg.p_gt = 1.0;
  const auto s = build_dataset(corpus, PolicyParams(16), judge, cfg, dir / "p.jsonl");
  CHECK(s.skipped.at(std::string(kSkipNoGroundTruth)) == 1);
}

TEST_CASE("load_pairs errors") {
  testing::TempDir dir;
  {
    std::ofstream out(dir / "partial.jsonl");
    out << "{\"partial\":true,\"error\":\"write failed\"}\n";
  }
  try {
    load_pairs(dir / "partial.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }
  {
    std::ofstream out(dir / "bad.jsonl");
    out << "\n{oops\n";
  }
  try {
    load_pairs(dir / "bad.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}
