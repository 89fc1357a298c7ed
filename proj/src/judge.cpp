#include "layoutpref/judge.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <ctime>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "layoutpref/dataio.hpp"
#include "layoutpref/error.hpp"
#include "layoutpref/metrics.hpp"

namespace layoutpref {

using nlohmann::json;

const std::string& judge_prompt() {
  static const std::string kPrompt =
      "You are a visual language model designed to evaluate and rate visual templates. You are "
      "presented with 2 visual templates, and your task is to choose the better template between "
      "these 2 based on the following criteria:\n"
      "\n"
      "Aesthetics: How visually appealing is the template,\n"
      "Clarity: How clear and easy to understand is the template,\n"
      "Usability: How practical and user-friendly is the template,\n"
      "Creativity: How unique and innovative is the design,\n"
      "Consistency: How consistent is the template with design principles and standards.\n"
      "\n"
      "Please provide your answer in the following JSON format and do not include any other "
      "details:\n"
      "\n"
      "{\"better_layout\": \"answer\"}\n"
      "\n"
      "where answer could either be image_1 or image_2.";
  return kPrompt;
}

namespace {

// End index (exclusive) of the balanced object starting at `open`, honoring
// string literals; npos when unbalanced.
std::size_t match_object(const std::string& text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string::npos;
}

std::string base64(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string base_path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint must include a scheme: " + url);
  }
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.base_path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
  return e;
}

// The verdict normally sits in choices[0].message.content; fall back to the raw body.
std::string verdict_text(const std::string& body) {
  try {
    const json doc = json::parse(body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
  } catch (const json::exception&) {
  }
  return body;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

JudgeDecision parse_decision(const std::string& text) {
  for (std::size_t open = text.find('{'); open != std::string::npos;
       open = text.find('{', open + 1)) {
    const std::size_t end = match_object(text, open);
    if (end == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text.substr(open, end - open));
    } catch (const json::exception&) {
      continue;
    }
    if (!obj.is_object() || !obj.contains("better_layout")) continue;
    const json& v = obj["better_layout"];
    JudgeDecision out;
    out.raw_response = text;
    if (v == "image_1") {
      out.d = 1;
    } else if (v == "image_2") {
      out.d = 2;
    } else {
      throw Error(ErrorCode::kUnparsableVerdict, "verdict value " + v.dump() + " is not image_1/image_2");
    }
    return out;
  }
  throw Error(ErrorCode::kUnparsableVerdict, "no verdict object in response");
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(bytes.data(), bytes.size(), digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char b : digest) {
    out += kHex[b >> 4];
    out += kHex[b & 0xF];
  }
  return out;
}

std::string sha256_hex(std::string_view text) {
  return sha256_hex(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string layout_hash(const Layout& layout) {
  nlohmann::ordered_json doc;
  doc["canvas"] = {{"w", layout.canvas.width}, {"h", layout.canvas.height}};
  auto& placements = doc["placements"] = nlohmann::ordered_json::array();
  for (const auto& p : layout.placements) {
    auto record = element_descriptor(p.element);
    record["bbox"] = {p.box.x, p.box.y, p.box.w, p.box.h};
    placements.push_back(std::move(record));
  }
  return sha256_hex(doc.dump());
}

JudgeDecision compare_remote(const JudgeConfig& cfg, const Image& first, const Image& second) {
  if (first.empty() || second.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "judge images must be nonempty");
  }
  const Endpoint endpoint = split_endpoint(cfg.endpoint);
  const auto image_part = [](const Image& img) {
    return json{{"type", "image_url"},
                {"image_url", {{"url", "data:image/png;base64," + base64(encode_png(img))}}}};
  };
  const json request = {
      {"model", cfg.model_name},
      {"temperature", cfg.temperature},
      {"messages",
       json::array({{{"role", "user"},
                     {"content", json::array({{{"type", "text"}, {"text", judge_prompt()}},
                                              image_part(first), image_part(second)})}}})}};
  const std::string body = request.dump();

  httplib::Client client(endpoint.origin);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  httplib::Headers headers;
  if (const char* key = std::getenv("JUDGE_API_KEY"); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error = "no attempt made";
  const int attempts = 1 + std::max(0, cfg.max_retries);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1 && cfg.retry_backoff.count() > 0) {
      std::this_thread::sleep_for(cfg.retry_backoff * (attempt - 1));
    }
    auto res = client.Post(endpoint.base_path + "/chat/completions", headers, body,
                           "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      spdlog::warn("judge attempt {}/{} failed: {}", attempt, attempts, last_error);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP status " + std::to_string(res->status);
      spdlog::warn("judge attempt {}/{} failed: {}", attempt, attempts, last_error);
      continue;
    }
    try {
      JudgeDecision d = parse_decision(verdict_text(res->body));
      d.raw_response = res->body;
      d.judge_id = "remote:" + cfg.model_name;
      return d;
    } catch (const Error& e) {
      last_error = e.what();
      spdlog::warn("judge attempt {}/{} unparsable: {}", attempt, attempts, last_error);
    }
  }
  throw Error(ErrorCode::kJudgeUnavailable,
              "gave up after " + std::to_string(attempts) + " attempts: " + last_error);
}

JudgeDecision compare_heuristic(const Layout& first, const Layout& second) {
  const double q1 = quality(first).q;
  const double q2 = quality(second).q;
  JudgeDecision out;
  out.d = q1 > q2 ? 1 : 2;
  out.judge_id = "heuristic-q";
  return out;
}

JudgeDecision HeuristicJudge::compare(const Layout& first, const Layout& second) {
  ++calls_;
  return compare_heuristic(first, second);
}

RemoteJudge::RemoteJudge(JudgeConfig cfg, RenderStyle style, const AssetResolver* assets)
    : cfg_(std::move(cfg)), style_(style), assets_(assets) {}

std::string RemoteJudge::id() const { return "remote:" + cfg_.model_name; }

std::string RemoteJudge::content_hash(const Layout& layout) const {
  return sha256_hex(encode_png(render(layout, style_, assets_)));
}

JudgeDecision RemoteJudge::compare(const Layout& first, const Layout& second) {
  ++calls_;
  const Image a = render(first, style_, assets_);
  const Image b = render(second, style_, assets_);
  JudgeDecision forward = compare_remote(cfg_, a, b);
  forward.judge_id = id();
  if (!cfg_.swap_and_vote) return forward;

  JudgeDecision backward = compare_remote(cfg_, b, a);
  const int backward_d = 3 - backward.d;
  JudgeDecision out = forward;
  out.swapped = true;
  if (backward_d != forward.d) {
    spdlog::info("judge order disagreement; falling back to heuristic ordering");
    out.d = compare_heuristic(first, second).d;
  }
  return out;
}

DecisionCache::DecisionCache(std::filesystem::path path) : path_(std::move(path)) {
  if (std::ifstream in(path_); in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const json rec = json::parse(line);
        JudgeDecision d;
        d.d = rec.at("d").get<int>();
        if (d.d != 1 && d.d != 2) throw Error(ErrorCode::kCacheError, "bad verdict");
        d.judge_id = rec.at("judge_id").get<std::string>();
        if (rec.contains("raw_response") && rec["raw_response"].is_string()) {
          d.raw_response = rec["raw_response"].get<std::string>();
        }
        d.swapped = rec.value("swapped", false);
        entries_[{rec.at("key1").get<std::string>(), rec.at("key2").get<std::string>(),
                  d.judge_id}] = d;
      } catch (const std::exception&) {
        ++skipped_lines_;
      }
    }
  }
  if (skipped_lines_ > 0) {
    spdlog::warn("decision cache {}: skipped {} corrupt line(s)", path_.string(), skipped_lines_);
  }
  out_.open(path_, std::ios::app);
  if (!out_) throw Error(ErrorCode::kCacheError, "cannot open decision cache " + path_.string());
}

std::optional<JudgeDecision> DecisionCache::find(const Key& key) const {
  std::shared_lock lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

void DecisionCache::store(const Key& key, const JudgeDecision& decision) {
  std::unique_lock lock(mutex_);
  entries_[key] = decision;
  json rec = {{"key1", std::get<0>(key)},
              {"key2", std::get<1>(key)},
              {"judge_id", std::get<2>(key)},
              {"d", decision.d},
              {"raw_response", decision.raw_response ? json(*decision.raw_response) : json(nullptr)},
              {"swapped", decision.swapped},
              {"timestamp", utc_timestamp()}};
  out_ << rec.dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kCacheError, "write to decision cache failed");
}

std::size_t DecisionCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

JudgeDecision cached_compare(DecisionCache* cache, Judge& judge, const Layout& first,
                             const Layout& second, std::int64_t* underlying_calls) {
  DecisionCache::Key key{judge.content_hash(first), judge.content_hash(second), judge.id()};
  if (cache != nullptr) {
    if (auto hit = cache->find(key)) return *hit;
  }
  JudgeDecision d = judge.compare(first, second);
  if (underlying_calls != nullptr) ++*underlying_calls;
  if (cache != nullptr) {
    try {
      cache->store(key, d);
    } catch (const Error& e) {
      spdlog::warn("{}; continuing uncached", e.what());
    }
  }
  return d;
}

JudgeDecision CachedJudge::compare(const Layout& first, const Layout& second) {
  DecisionCache::Key key{inner_.content_hash(first), inner_.content_hash(second), inner_.id()};
  if (cache_ != nullptr) {
    if (auto hit = cache_->find(key)) {
      ++cache_hits_;
      return *hit;
    }
  }
  ++underlying_calls_;
  JudgeDecision d = inner_.compare(first, second);
  if (cache_ != nullptr) {
    try {
      cache_->store(key, d);
    } catch (const Error& e) {
      spdlog::warn("{}; continuing uncached", e.what());
    }
  }
  return d;
}

}  // namespace layoutpref
