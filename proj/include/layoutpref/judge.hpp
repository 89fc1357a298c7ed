#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>

#include "layoutpref/image.hpp"
#include "layoutpref/layout.hpp"
#include "layoutpref/render.hpp"

namespace layoutpref {

struct JudgeDecision {
  int d = 1;  // 1: first input is better, 2: second input is better
  std::string judge_id;
  std::optional<std::string> raw_response;
  bool swapped = false;

  bool operator==(const JudgeDecision&) const = default;
};

struct JudgeConfig {
  std::string endpoint;  // base URL; requests go to {endpoint}/chat/completions
  std::string model_name;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  double temperature = 0.0;
  bool swap_and_vote = false;
  std::chrono::milliseconds retry_backoff{500};
  int max_in_flight = 4;
};

/// Pairwise judge prompt, byte-stable.
const std::string& judge_prompt();

/// Finds the first well-formed JSON object carrying "better_layout" in text.
/// Throws Error(kUnparsableVerdict) when there is none or its value is not
/// image_1 / image_2.
JudgeDecision parse_decision(const std::string& text);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// Hash of the canonical JSON of a layout.
std::string layout_hash(const Layout& layout);

/// Sends one chat-completion request carrying the judge prompt and both images
/// (first, then second) per attempt; attempts = 1 + max_retries. Transport
/// failures and unparsable verdicts are retried. Throws
/// Error(kJudgeUnavailable) once attempts are exhausted. The bearer token is
/// read from JUDGE_API_KEY.
JudgeDecision compare_remote(const JudgeConfig& cfg, const Image& first, const Image& second);

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string id() const = 0;
  /// Cache key component for one input.
  virtual std::string content_hash(const Layout& layout) const = 0;
  virtual JudgeDecision compare(const Layout& first, const Layout& second) = 0;
};

/// Orders layouts by combined quality; exact ties go to the second input.
class HeuristicJudge : public Judge {
 public:
  std::string id() const override { return "heuristic-q"; }
  std::string content_hash(const Layout& layout) const override { return layout_hash(layout); }
  JudgeDecision compare(const Layout& first, const Layout& second) override;

  std::int64_t calls() const { return calls_.load(); }

 private:
  std::atomic<std::int64_t> calls_{0};
};

JudgeDecision compare_heuristic(const Layout& first, const Layout& second);

/// Renders both layouts and asks a remote vision-chat model. With
/// swap_and_vote a second, order-swapped query is issued; disagreement falls
/// back to the heuristic judge.
class RemoteJudge : public Judge {
 public:
  RemoteJudge(JudgeConfig cfg, RenderStyle style, const AssetResolver* assets = nullptr);

  std::string id() const override;
  std::string content_hash(const Layout& layout) const override;
  JudgeDecision compare(const Layout& first, const Layout& second) override;

  std::int64_t calls() const { return calls_.load(); }

 private:
  JudgeConfig cfg_;
  RenderStyle style_;
  const AssetResolver* assets_;
  std::atomic<std::int64_t> calls_{0};
};

/// Append-only JSONL store of decisions keyed by (hash 1, hash 2, judge id).
/// Corrupt lines are skipped on load. Reads may run concurrently; appends are
/// serialized.
class DecisionCache {
 public:
  using Key = std::tuple<std::string, std::string, std::string>;

  /// Throws Error(kCacheError) if the file cannot be opened for appending.
  explicit DecisionCache(std::filesystem::path path);

  std::optional<JudgeDecision> find(const Key& key) const;
  /// Throws Error(kCacheError) on a failed write; the in-memory entry is kept.
  void store(const Key& key, const JudgeDecision& decision);

  std::size_t size() const;
  std::size_t skipped_lines() const { return skipped_lines_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::map<Key, JudgeDecision> entries_;
  std::ofstream out_;
  std::size_t skipped_lines_ = 0;
};

/// Judge wrapper consulting a DecisionCache before the underlying judge.
/// Without a cache (or after a cache I/O error) it judges uncached.
class CachedJudge : public Judge {
 public:
  CachedJudge(Judge& inner, DecisionCache* cache) : inner_(inner), cache_(cache) {}

  std::string id() const override { return inner_.id(); }
  std::string content_hash(const Layout& layout) const override {
    return inner_.content_hash(layout);
  }
  JudgeDecision compare(const Layout& first, const Layout& second) override;

  std::int64_t underlying_calls() const { return underlying_calls_.load(); }
  std::int64_t cache_hits() const { return cache_hits_.load(); }

 private:
  Judge& inner_;
  DecisionCache* cache_;
  std::atomic<std::int64_t> underlying_calls_{0};
  std::atomic<std::int64_t> cache_hits_{0};
};

JudgeDecision cached_compare(DecisionCache* cache, Judge& judge, const Layout& first,
                             const Layout& second, std::int64_t* underlying_calls = nullptr);

}  // namespace layoutpref
