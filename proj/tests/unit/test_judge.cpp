#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "layoutpref/error.hpp"
#include "layoutpref/judge.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using namespace layoutpref;
using testing::place;
using testing::shape;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

Layout aligned() {
  Layout l;
  l.canvas = {100, 100};
  l.placements = {place(shape("a"), 5, 5, 10, 10), place(shape("b"), 15, 5, 10, 10)};
  return l;
}

Layout stacked() {
  Layout l;
  l.canvas = {100, 100};
  l.placements = {place(shape("a"), 50, 50, 10, 10), place(shape("b"), 50, 50, 10, 10)};
  return l;
}

JudgeConfig stub_config(const testing::StubJudgeServer& s) {
  JudgeConfig cfg;
  cfg.endpoint = s.endpoint();
  cfg.model_name = "stub-model";
  cfg.timeout = std::chrono::milliseconds(2000);
  cfg.retry_backoff = std::chrono::milliseconds(0);
  return cfg;
}

RenderStyle small_style() {
  RenderStyle s;
  s.target_long_side = 64;
  return s;
}

}  // namespace

TEST_CASE("judge prompt text") {
  const std::string& p = judge_prompt();
  CHECK(p.find("{\"better_layout\": \"answer\"}") != std::string::npos);
  CHECK(p.find("Aesthetics: How visually appealing is the template,") != std::string::npos);
  CHECK(p.find("Consistency: ") != std::string::npos);
  CHECK(p.back() == '.');
  CHECK(&judge_prompt() == &p);
}

TEST_CASE("parse_decision") {
  CHECK(parse_decision(R"({"better_layout": "image_1"})").d == 1);
  CHECK(parse_decision(R"(Sure! {"better_layout": "image_2"} Hope this helps.)").d == 2);
  CHECK(parse_decision("```json\n{\"note\": \"}\", \"better_layout\":\"image_2\"}\n```").d == 2);
  CHECK(parse_decision(R"({"x": 1} then {"better_layout": "image_1"})").d == 1);
  CHECK(code_of([] { parse_decision(R"({"better_layout": "image_3"})"); }) ==
        ErrorCode::kUnparsableVerdict);
  CHECK(code_of([] { parse_decision("image_1"); }) == ErrorCode::kUnparsableVerdict);
  CHECK(code_of([] { parse_decision(R"({"better_layout": "image_1")"); }) ==
        ErrorCode::kUnparsableVerdict);
}

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex(std::string_view("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex(std::string_view("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(layout_hash(aligned()) == layout_hash(aligned()));
  CHECK(layout_hash(aligned()) != layout_hash(stacked()));
}

TEST_CASE("heuristic judge ordering and ties") {
  CHECK(compare_heuristic(aligned(), stacked()).d == 1);
  CHECK(compare_heuristic(stacked(), aligned()).d == 2);
  CHECK(compare_heuristic(aligned(), aligned()).d == 2);
  HeuristicJudge j;
  j.compare(aligned(), stacked());
  CHECK(j.calls() == 1);
  CHECK(j.compare(aligned(), stacked()).judge_id == "heuristic-q");
}

TEST_CASE("remote: verdicts, request shape and auth") {
  testing::StubJudgeServer stub;
  const JudgeConfig cfg = stub_config(stub);
  const Image a(8, 8, Rgba{1, 2, 3, 255}), b(8, 8, Rgba{4, 5, 6, 255});
  ::setenv("JUDGE_API_KEY", "sekret", 1);
  stub.always(R"({"better_layout": "image_1"})");
  const auto d1 = compare_remote(cfg, a, b);
  CHECK(d1.d == 1);
  CHECK(d1.judge_id == "remote:stub-model");
  REQUIRE(d1.raw_response.has_value());
  stub.always(R"(I pick {"better_layout": "image_2"})");
  CHECK(compare_remote(cfg, a, b).d == 2);
  CHECK(stub.hits() == 2);
  CHECK(stub.last_path() == "/v1/chat/completions");
  CHECK(stub.last_auth() == "Bearer sekret");
  ::unsetenv("JUDGE_API_KEY");

  const auto body = nlohmann::json::parse(stub.last_body());
  CHECK(body["model"] == "stub-model");
  const auto& content = body["messages"][0]["content"];
  REQUIRE(content.size() == 3);
  CHECK(content[0]["text"] == judge_prompt());
  const std::string url = content[1]["image_url"]["url"];
  CHECK(url.rfind("data:image/png;base64,", 0) == 0);
  CHECK(content[1] != content[2]);
}

TEST_CASE("remote: retries on malformed replies") {
  testing::StubJudgeServer stub;
  JudgeConfig cfg = stub_config(stub);
  cfg.max_retries = 3;
  const Image a(4, 4), b(4, 4);
  stub.script({{200, "no idea"}, {200, "{\"better_layout\": \"both\"}"}, {200, R"({"better_layout": "image_2"})"}});
  CHECK(compare_remote(cfg, a, b).d == 2);
  CHECK(stub.hits() == 3);

  stub.reset_hits();
  stub.script({{500, ""}, {200, R"({"better_layout": "image_1"})"}});
  CHECK(compare_remote(cfg, a, b).d == 1);
  CHECK(stub.hits() == 2);

  stub.reset_hits();
  cfg.max_retries = 2;
  stub.always("garbage");
  CHECK(code_of([&] { compare_remote(cfg, a, b); }) == ErrorCode::kJudgeUnavailable);
  CHECK(stub.hits() == 3);
}

TEST_CASE("remote: unreachable endpoint") {
  JudgeConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/v1";
  cfg.max_retries = 1;
  cfg.timeout = std::chrono::milliseconds(500);
  cfg.retry_backoff = std::chrono::milliseconds(0);
  CHECK(code_of([&] { compare_remote(cfg, Image(2, 2), Image(2, 2)); }) == ErrorCode::kJudgeUnavailable);
}

TEST_CASE("remote judge with swap and vote") {
  testing::StubJudgeServer stub;
  JudgeConfig cfg = stub_config(stub);
  cfg.swap_and_vote = true;
  RemoteJudge judge(cfg, small_style());
  // Always "image_1": the swapped query contradicts the first, so the
  // heuristic ordering decides.
  stub.always(R"({"better_layout": "image_1"})");
  auto d = judge.compare(stacked(), aligned());
  CHECK(stub.hits() == 2);
  CHECK(d.swapped);
  CHECK(d.d == 2);
  // Consistent answers: image_1 then image_2 on the swapped order.
  stub.reset_hits();
  stub.script({{200, R"({"better_layout": "image_1"})"}, {200, R"({"better_layout": "image_2"})"}});
  d = judge.compare(stacked(), aligned());
  CHECK(d.d == 1);
  CHECK(d.judge_id == "remote:stub-model");
}

TEST_CASE("decision cache persists and skips corrupt lines") {
  testing::TempDir dir;
  const auto path = dir / "cache.jsonl";
  HeuristicJudge inner;
  {
    DecisionCache cache(path);
    CachedJudge j(inner, &cache);
    CHECK(j.compare(aligned(), stacked()).d == 1);
    CHECK(j.compare(aligned(), stacked()).d == 1);
    CHECK(j.underlying_calls() == 1);
    CHECK(j.cache_hits() == 1);
    j.compare(stacked(), aligned());
    CHECK(cache.size() == 2);
  }
  {
    std::ofstream out(path, std::ios::app);
    out << "{not json\n";
  }
  DecisionCache reloaded(path);
  CHECK(reloaded.size() == 2);
  CHECK(reloaded.skipped_lines() == 1);
  CachedJudge j(inner, &reloaded);
  j.compare(aligned(), stacked());
  CHECK(j.underlying_calls() == 0);
  CHECK(inner.calls() == 2);
}

TEST_CASE("corrupted entry is re-judged") {
  testing::TempDir dir;
  const auto path = dir / "cache.jsonl";
  HeuristicJudge inner;
  const std::string k1 = inner.content_hash(aligned()), k2 = inner.content_hash(stacked());
  {
    std::ofstream out(path);
    out << R"({"key1":")" << k1 << R"(","key2":")" << k2 << R"(","judge_id":"heuristic-q","d":7})" << "\n";
  }
  DecisionCache cache(path);
  CHECK(cache.skipped_lines() == 1);
  std::int64_t calls = 0;
  CHECK(cached_compare(&cache, inner, aligned(), stacked(), &calls).d == 1);
  CHECK(calls == 1);
  CHECK(cached_compare(&cache, inner, aligned(), stacked(), &calls).d == 1);
  CHECK(calls == 1);
}

TEST_CASE("cache cannot be opened") {
  CHECK(code_of([] { DecisionCache c("/nonexistent-dir/x/cache.jsonl"); }) == ErrorCode::kCacheError);
  HeuristicJudge inner;
  CachedJudge j(inner, nullptr);
  j.compare(aligned(), stacked());
  j.compare(aligned(), stacked());
  CHECK(j.underlying_calls() == 2);
}
