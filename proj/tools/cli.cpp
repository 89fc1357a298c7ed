#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "layoutpref/checkpoint.hpp"
#include "layoutpref/dataio.hpp"
#include "layoutpref/error.hpp"
#include "layoutpref/eval.hpp"
#include "layoutpref/gradcheck.hpp"
#include "layoutpref/judge.hpp"
#include "layoutpref/metrics.hpp"
#include "layoutpref/parallel.hpp"
#include "layoutpref/preference.hpp"
#include "layoutpref/random.hpp"
#include "layoutpref/render.hpp"
#include "layoutpref/train.hpp"

namespace layoutpref::cli {
namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string log_level = "info";
  std::string config;
};

struct JudgeOptions {
  std::string kind = "heuristic";
  std::string endpoint;
  std::string model = "gpt-4o";
  int timeout_ms = 60'000;
  int max_retries = 3;
  int retry_backoff_ms = 500;
  bool swap_and_vote = false;
  std::string cache;
  std::string render_mode = "boxes";
  int render_size = 512;
  std::string assets;
};

void add_judge_options(CLI::App* sub, JudgeOptions& j) {
  sub->add_option("--judge", j.kind, "heuristic or remote")
      ->check(CLI::IsMember({"heuristic", "remote"}));
  sub->add_option("--endpoint", j.endpoint, "base URL of an OpenAI-compatible API (remote judge)");
  sub->add_option("--model", j.model, "remote judge model name");
  sub->add_option("--timeout-ms", j.timeout_ms, "per-request timeout");
  sub->add_option("--max-retries", j.max_retries, "retries after the first attempt");
  sub->add_option("--retry-backoff-ms", j.retry_backoff_ms, "linear backoff between attempts");
  sub->add_flag("--swap-and-vote", j.swap_and_vote, "query both orders; disagreement uses the heuristic");
  sub->add_option("--cache", j.cache, "JSONL decision cache");
  sub->add_option("--render-mode", j.render_mode, "boxes or composite")
      ->check(CLI::IsMember({"boxes", "composite"}));
  sub->add_option("--render-size", j.render_size, "long side of judge renders in pixels");
  sub->add_option("--assets", j.assets, "asset root for composite renders");
}

RenderStyle make_style(const std::string& mode, int size) {
  RenderStyle style;
  style.mode = parse_render_mode(mode);
  style.target_long_side = size;
  return style;
}

// Owns whatever the chosen judge needs for its lifetime.
struct JudgeBundle {
  std::unique_ptr<AssetResolver> assets;
  std::unique_ptr<Judge> base;
  std::unique_ptr<DecisionCache> cache;
  std::unique_ptr<CachedJudge> cached;

  Judge& judge() { return cached ? static_cast<Judge&>(*cached) : *base; }
};

JudgeBundle make_judge(const JudgeOptions& j, int threads) {
  JudgeBundle b;
  if (j.kind == "remote") {
    if (j.endpoint.empty()) throw CLI::ValidationError("--endpoint", "required with --judge remote");
    JudgeConfig cfg;
    cfg.endpoint = j.endpoint;
    cfg.model_name = j.model;
    cfg.timeout = std::chrono::milliseconds(j.timeout_ms);
    cfg.max_retries = j.max_retries;
    cfg.retry_backoff = std::chrono::milliseconds(j.retry_backoff_ms);
    cfg.swap_and_vote = j.swap_and_vote;
    cfg.max_in_flight = threads;
    if (!j.assets.empty()) b.assets = std::make_unique<FileAssetResolver>(j.assets);
    b.base = std::make_unique<RemoteJudge>(cfg, make_style(j.render_mode, j.render_size), b.assets.get());
  } else {
    b.base = std::make_unique<HeuristicJudge>();
  }
  if (!j.cache.empty()) {
    b.cache = std::make_unique<DecisionCache>(j.cache);
    b.cached = std::make_unique<CachedJudge>(*b.base, b.cache.get());
  }
  return b;
}

std::string file_name(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void log_resolved_config(const CLI::App& app, const CLI::App& sub) {
  const auto dump = [](const CLI::App& a) {
    for (const CLI::Option* opt : a.get_options()) {
      if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
      std::string value;
      if (opt->count() > 0) {
        for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
      } else {
        value = opt->get_default_str();
      }
      std::string key = opt->get_name();
      key.erase(0, key.find_first_not_of('-'));
      spdlog::info("config {}={}", key, value);
    }
  };
  spdlog::info("subcommand {}", sub.get_name());
  dump(app);
  dump(sub);
}

// Config file entries override flags given on the command line.
void apply_config(CLI::App& app, CLI::App& sub, const std::string& path) {
  for (const auto& [key, value] : parse_config_file(path)) {
    const std::string name = "--" + key;
    CLI::Option* opt = sub.get_option_no_throw(name);
    if (opt == nullptr) opt = app.get_option_no_throw(name);
    if (opt == nullptr || key == "config") {
      throw CLI::ValidationError(path, "unknown config key '" + key + "'");
    }
    opt->clear();
    opt->add_result(value);
    opt->run_callback();
  }
}

spdlog::level::level_enum parse_level(const std::string& name) {
  const auto level = spdlog::level::from_str(name);
  if (level == spdlog::level::off && name != "off") {
    throw CLI::ValidationError("--log-level", "unknown level '" + name + "'");
  }
  return level;
}

PolicyParams load_policy(const std::string& path) {
  PolicyParams p = load_checkpoint(path);
  spdlog::info("loaded policy {} (bins={})", path, p.bins());
  return p;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError, fmt::format("{}:{}: expected key=value", path, lineno));
    }
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty()) throw Error(ErrorCode::kParseError, fmt::format("{}:{}: empty key", path, lineno));
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aesthetic-aware layout generation toolkit", "layoutpref"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "root seed for all randomness");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");
  app.add_option("--config", g.config, "key=value file; entries override command-line flags");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  SyntheticSpec spec;
  std::string synth_style = "grid_aligned", synth_out;
  int min_el = spec.elements_per_sample.first, max_el = spec.elements_per_sample.second;
  double salt = 0.0;
  synth->add_option("--n", spec.n_samples, "number of samples");
  synth->add_option("--style", synth_style, "grid_aligned, jittered or random")
      ->check(CLI::IsMember({"grid_aligned", "jittered", "random"}));
  synth->add_option("--min-elements", min_el);
  synth->add_option("--max-elements", max_el);
  synth->add_option("--jitter", spec.jitter_px, "pixel noise half-width (jittered)");
  synth->add_option("--background-prob", spec.background_probability);
  synth->add_option("--id-prefix", spec.id_prefix);
  synth->add_option("--salt-degenerate", salt, "fraction of samples collapsed onto one box");
  synth->add_option("--out", synth_out, "output JSONL")->required();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "load and validate a dataset");
  std::string ingest_in, ingest_out;
  bool ingest_validate = false;
  ingest->add_option("--in", ingest_in)->required();
  ingest->add_flag("--validate", ingest_validate, "also require ground-truth boxes");
  ingest->add_option("--out", ingest_out, "rewrite in canonical form");

  // stats
  auto* stats = app.add_subcommand("stats", "quality statistics of a dataset");
  std::string stats_in, stats_csv;
  stats->add_option("--in", stats_in)->required();
  stats->add_option("--csv", stats_csv, "per-sample quality table");

  // filter
  auto* filter = app.add_subcommand("filter", "keep samples above the quality threshold");
  std::string filter_in, filter_out;
  filter->add_option("--in", filter_in)->required();
  filter->add_option("--out", filter_out)->required();

  // train-ce
  auto* train_ce_cmd = app.add_subcommand("train-ce", "cross-entropy training on ground truth");
  TrainConfig ce_cfg;
  std::string ce_data, ce_out, ce_resume;
  int ce_bins = kDefaultBins;
  int ce_log_every = 1;
  train_ce_cmd->add_option("--data", ce_data)->required();
  train_ce_cmd->add_option("--out", ce_out, "checkpoint path")->required();
  train_ce_cmd->add_option("--resume", ce_resume, "start from this checkpoint");
  train_ce_cmd->add_option("--bins", ce_bins);
  train_ce_cmd->add_option("--steps", ce_cfg.steps);
  train_ce_cmd->add_option("--batch", ce_cfg.batch_size);
  train_ce_cmd->add_option("--lr", ce_cfg.lr);
  train_ce_cmd->add_option("--warmup-ratio", ce_cfg.warmup_ratio);
  train_ce_cmd->add_option("--weight-decay", ce_cfg.weight_decay);
  train_ce_cmd->add_option("--log-every", ce_log_every);

  // pair
  auto* pair_cmd = app.add_subcommand("pair", "build a preference dataset");
  PairingConfig pcfg;
  std::string pair_data, pair_policy, pair_out;
  std::optional<double> pair_temperature;
  JudgeOptions pair_judge;
  pair_cmd->add_option("--data", pair_data)->required();
  pair_cmd->add_option("--policy", pair_policy)->required();
  pair_cmd->add_option("--out", pair_out)->required();
  pair_cmd->add_option("--p-gt", pcfg.p_gt);
  pair_cmd->add_option("--candidates", pcfg.candidates_per_input);
  pair_cmd->add_option("--attempts", pcfg.attempts_per_input, "pairs attempted per sample");
  pair_cmd->add_option("--temperature", pair_temperature, "defaults to the checkpoint's value");
  pair_cmd->add_option("--quality-filter", pcfg.apply_quality_filter, "true or false");
  add_judge_options(pair_cmd, pair_judge);

  // train-aapa
  auto* aapa_cmd = app.add_subcommand("train-aapa", "preference training against a frozen reference");
  TrainConfig ap_cfg;
  ap_cfg.steps = 300;
  ap_cfg.lr = 0.01;
  std::string ap_pairs, ap_policy, ap_out;
  int ap_log_every = 1;
  aapa_cmd->add_option("--pairs", ap_pairs)->required();
  aapa_cmd->add_option("--policy", ap_policy, "initial policy, also the reference")->required();
  aapa_cmd->add_option("--out", ap_out)->required();
  aapa_cmd->add_option("--steps", ap_cfg.steps);
  aapa_cmd->add_option("--batch", ap_cfg.batch_size);
  aapa_cmd->add_option("--lr", ap_cfg.lr);
  aapa_cmd->add_option("--beta", ap_cfg.beta);
  aapa_cmd->add_option("--warmup-ratio", ap_cfg.warmup_ratio);
  aapa_cmd->add_option("--weight-decay", ap_cfg.weight_decay);
  aapa_cmd->add_option("--log-every", ap_log_every);

  // eval-iou
  auto* eval_iou_cmd = app.add_subcommand("eval-iou", "mean IoU against ground truth");
  std::string ei_data, ei_policy, ei_csv, ei_mode = "all";
  bool ei_oracle = false;
  eval_iou_cmd->add_option("--data", ei_data)->required();
  auto* ei_policy_opt = eval_iou_cmd->add_option("--policy", ei_policy);
  eval_iou_cmd->add_flag("--oracle", ei_oracle, "score the ground truth itself")->excludes(ei_policy_opt);
  eval_iou_cmd->add_option("--mode", ei_mode)->check(CLI::IsMember({"all", "single", "multiple"}));
  eval_iou_cmd->add_option("--csv", ei_csv, "per-instance scores");

  // eval-winrate
  auto* eval_wr_cmd = app.add_subcommand("eval-winrate", "judge win rate against ground truth");
  std::string ew_data, ew_policy, ew_csv;
  bool ew_oracle = false;
  JudgeOptions ew_judge;
  eval_wr_cmd->add_option("--data", ew_data)->required();
  auto* ew_policy_opt = eval_wr_cmd->add_option("--policy", ew_policy);
  eval_wr_cmd->add_flag("--oracle", ew_oracle, "judge the ground truth against itself")->excludes(ew_policy_opt);
  eval_wr_cmd->add_option("--csv", ew_csv);
  add_judge_options(eval_wr_cmd, ew_judge);

  // render
  auto* render_cmd = app.add_subcommand("render", "rasterize one sample to PNG");
  std::string r_data, r_sample, r_out, r_mode = "boxes", r_assets, r_policy, r_background;
  int r_size = 512;
  render_cmd->add_option("--input,--data", r_data, "dataset JSONL")->required();
  render_cmd->add_option("--id,--sample", r_sample, "sample id (default: first)");
  render_cmd->add_option("--out", r_out)->required();
  render_cmd->add_option("--mode", r_mode)->check(CLI::IsMember({"boxes", "composite"}));
  render_cmd->add_option("--size", r_size, "long side in pixels");
  render_cmd->add_option("--assets", r_assets, "asset root for composite mode");
  render_cmd->add_option("--policy", r_policy, "render this policy's prediction");
  render_cmd->add_option("--background", r_background, "draw translucent boxes over this PNG");

  // gradcheck
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of the analytic gradients");
  int gc_bins = 16, gc_elements = 3, gc_batch = 4;
  std::size_t gc_probes = kDefaultProbeCount;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  gc_cmd->add_option("--bins", gc_bins);
  gc_cmd->add_option("--elements", gc_elements);
  gc_cmd->add_option("--batch", gc_batch);
  gc_cmd->add_option("--probes", gc_probes);
  gc_cmd->add_option("--eps", gc_eps);
  gc_cmd->add_option("--tolerance", gc_tol);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  CLI::App* sub = nullptr;
  try {
    app.parse(reversed);
    sub = app.get_subcommands().front();
    if (!g.config.empty()) apply_config(app, *sub, g.config);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  sink->set_pattern("[%l] %v");
  auto logger = std::make_shared<spdlog::logger>("layoutpref", sink);
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> logger;
    ~Restore() { spdlog::set_default_logger(logger); }
  } restore{previous};

  try {
    logger->set_level(parse_level(g.log_level));
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  log_resolved_config(app, *sub);

  try {
    const std::string name = sub->get_name();
    if (name == "synth") {
      spec.seed = g.seed;
      spec.style = parse_synthetic_style(synth_style);
      spec.elements_per_sample = {min_el, max_el};
      auto samples = make_synthetic(spec);
      if (salt > 0.0) salt_degenerate(samples, salt, g.seed);
      save_dataset(samples, synth_out);
      out << fmt::format("samples={} style={} out={}\n", samples.size(), synth_style, synth_out);
    } else if (name == "ingest") {
      const auto samples = load_dataset(ingest_in);
      if (ingest_validate) {
        for (const auto& s : samples) {
          validate(s.ground_truth());
        }
      }
      if (!ingest_out.empty()) save_dataset(samples, ingest_out);
      out << fmt::format("samples={} valid=true\n", samples.size());
    } else if (name == "stats" || name == "filter") {
      const auto samples = load_dataset(name == "stats" ? stats_in : filter_in);
      std::vector<QualityReport> reports(samples.size());
      parallel_for(samples.size(), g.threads,
                   [&](std::size_t i) { reports[i] = quality(samples[i].ground_truth()); });
      std::vector<double> q;
      for (const auto& r : reports) q.push_back(r.q);
      const auto st = dataset_stats(q);
      if (st.std == 0.0) {
        spdlog::warn("quality std is 0: the strict threshold rule keeps no sample");
      }
      if (name == "stats") {
        std::vector<bool> keep(samples.size(), false);
        for (std::size_t i : filter_by_threshold(q, st)) keep[i] = true;
        std::ofstream csv;
        if (!stats_csv.empty()) csv.open(stats_csv, std::ios::binary | std::ios::trunc);
        const std::string header = "id,q_align,q_overlap_raw,q_overlap_norm,q,kept\n";
        out << header;
        if (csv.is_open()) csv << header;
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const auto& r = reports[i];
          const std::string row = fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", samples[i].id,
                                              r.q_align, r.q_overlap_raw, r.q_overlap_norm, r.q,
                                              keep[i] ? 1 : 0);
          out << row;
          if (csv.is_open()) csv << row;
        }
        if (csv.is_open() && !csv) throw Error(ErrorCode::kIoError, "write to " + stats_csv + " failed");
        out << fmt::format("# count={} mean={:.6f} std={:.6f} threshold={:.6f}\n", st.count, st.mean,
                           st.std, st.threshold);
      } else {
        std::vector<DatasetSample> kept;
        for (std::size_t i : filter_by_threshold(q, st)) kept.push_back(samples[i]);
        save_dataset(kept, filter_out);
        out << fmt::format("kept={} total={} threshold={:.6f}\n", kept.size(), samples.size(),
                           st.threshold);
      }
    } else if (name == "train-ce") {
      const auto samples = load_dataset(ce_data);
      PolicyParams params = ce_resume.empty() ? PolicyParams(ce_bins) : load_policy(ce_resume);
      const auto examples = make_ce_examples(samples, params.bins());
      ce_cfg.seed = g.seed;
      out << "step,lr,loss\n";
      const double loss = train_ce(params, examples, ce_cfg, [&](const StepLog& s) {
        if (s.step == 1 || s.step % ce_log_every == 0 || s.step == ce_cfg.steps) {
          out << fmt::format("{},{:.6g},{:.6f}\n", s.step, s.lr, s.loss);
        }
      });
      save_checkpoint(ce_out, params,
                      {{"objective", "cross-entropy"},
                       {"steps", std::to_string(ce_cfg.steps)},
                       {"batch", std::to_string(ce_cfg.batch_size)},
                       {"lr", format_double(ce_cfg.lr)},
                       {"warmup_ratio", format_double(ce_cfg.warmup_ratio)},
                       {"weight_decay", format_double(ce_cfg.weight_decay)},
                       {"seed", std::to_string(g.seed)},
                       {"data", file_name(ce_data)},
                       {"resumed_from", ce_resume.empty() ? "" : file_name(ce_resume)},
                       {"final_loss", format_double(loss)}});
      spdlog::info("saved {}", ce_out);
    } else if (name == "pair") {
      const auto samples = load_dataset(pair_data);
      const PolicyParams params = load_policy(pair_policy);
      pcfg.seed = g.seed;
      pcfg.threads = g.threads;
      pcfg.temperature = pair_temperature.value_or(params.sampling_temperature);
      JudgeBundle jb = make_judge(pair_judge, g.threads);
      // The bundle's cache (if any) is handed to build_dataset for accounting.
      const PairingSummary summary =
          build_dataset(samples, params, *jb.base, pcfg, pair_out, jb.cache.get());
      out << summary.to_json().dump() << '\n';
    } else if (name == "train-aapa") {
      const auto pairs = load_pairs(ap_pairs);
      PolicyParams params = load_policy(ap_policy);
      const PolicyParams reference = params;  // frozen snapshot at the start
      std::vector<PreferenceExample> examples;
      examples.reserve(pairs.size());
      for (const auto& p : pairs) {
        if (p.winner.bins != params.bins()) {
          throw Error(ErrorCode::kShapeMismatch, "pair file and policy use different bin counts");
        }
        examples.push_back(to_example(p));
      }
      ap_cfg.seed = g.seed;
      out << "step,lr,loss\n";
      const double loss = train_aapa(params, reference, examples, ap_cfg, [&](const StepLog& s) {
        if (s.step == 1 || s.step % ap_log_every == 0 || s.step == ap_cfg.steps) {
          out << fmt::format("{},{:.6g},{:.6f}\n", s.step, s.lr, s.loss);
        }
      });
      save_checkpoint(ap_out, params,
                      {{"objective", "preference"},
                       {"steps", std::to_string(ap_cfg.steps)},
                       {"batch", std::to_string(ap_cfg.batch_size)},
                       {"lr", format_double(ap_cfg.lr)},
                       {"beta", format_double(ap_cfg.beta)},
                       {"warmup_ratio", format_double(ap_cfg.warmup_ratio)},
                       {"weight_decay", format_double(ap_cfg.weight_decay)},
                       {"seed", std::to_string(g.seed)},
                       {"pairs", file_name(ap_pairs)},
                       {"reference", file_name(ap_policy)},
                       {"final_loss", format_double(loss)}});
      spdlog::info("saved {}", ap_out);
    } else if (name == "eval-iou" || name == "eval-winrate") {
      const bool iou_mode = name == "eval-iou";
      const auto samples = load_dataset(iou_mode ? ei_data : ew_data);
      const std::string& policy_path = iou_mode ? ei_policy : ew_policy;
      const bool oracle = iou_mode ? ei_oracle : ew_oracle;
      if (policy_path.empty() && !oracle) {
        err << "error: one of --policy or --oracle is required\n";
        return 1;
      }
      std::optional<PolicyParams> params;
      std::unique_ptr<Predictor> predictor;
      if (oracle) {
        predictor = std::make_unique<GroundTruthPredictor>();
      } else {
        params = load_policy(policy_path);
        predictor = std::make_unique<PolicyPredictor>(*params);
      }
      EvalOptions opts;
      opts.threads = g.threads;
      if (params) opts.bins = params->bins();
      EvalReport report;
      if (iou_mode) {
        report = mean_iou(samples, *predictor, parse_eval_mode(ei_mode), opts);
      } else {
        JudgeBundle jb = make_judge(ew_judge, g.threads);
        report = win_rate(samples, *predictor, jb.judge(), opts);
      }
      const std::string& csv = iou_mode ? ei_csv : ew_csv;
      if (!csv.empty()) write_instances_csv(report, csv);
      out << report.summary_line() << '\n';
    } else if (name == "render") {
      const auto samples = load_dataset(r_data);
      if (samples.empty()) throw Error(ErrorCode::kEmptyDataset, r_data + " has no samples");
      const DatasetSample* chosen = &samples.front();
      if (!r_sample.empty()) {
        chosen = nullptr;
        for (const auto& s : samples) {
          if (s.id == r_sample) chosen = &s;
        }
        if (chosen == nullptr) throw Error(ErrorCode::kInvalidArgument, "no sample " + r_sample);
      }
      Layout layout;
      if (r_policy.empty()) {
        layout = chosen->ground_truth();
      } else {
        const PolicyParams params = load_policy(r_policy);
        layout = PolicyPredictor(params).predict(*chosen, {});
      }
      const RenderStyle style = make_style(r_mode, r_size);
      Image img;
      if (!r_background.empty()) {
        img = render_boxes_on_background(layout, read_png(r_background), style);
      } else {
        std::unique_ptr<AssetResolver> assets;
        if (!r_assets.empty()) assets = std::make_unique<FileAssetResolver>(r_assets);
        img = render(layout, style, assets.get());
      }
      write_png(img, r_out);
      out << fmt::format("sample={} size={}x{} out={}\n", chosen->id, img.width(), img.height(), r_out);
    } else if (name == "gradcheck") {
      std::mt19937_64 rng(mix_seed(g.seed, 0x6C));
      PolicyParams params(gc_bins), reference(gc_bins);
      randomize(params, mix_seed(g.seed, 1), 0.5);
      randomize(reference, mix_seed(g.seed, 2), 0.5);
      std::vector<PolicyExample> ce_batch;
      std::vector<PreferenceExample> pref_batch;
      for (int b = 0; b < gc_batch; ++b) {
        std::vector<Element> elements;
        for (int e = 0; e < gc_elements; ++e) {
          Element el;
          el.id = "e" + std::to_string(e);
          el.kind = static_cast<ElementKind>(uniform_int(rng, 0, 2));
          if (el.kind == ElementKind::kText) el.text = "t";
          elements.push_back(el);
        }
        const Canvas canvas{uniform(rng, 200, 800), uniform(rng, 200, 800)};
        const auto features = featurize(canvas, elements, {}, gc_bins);
        const auto draw = [&] {
          std::vector<int> t;
          for (int k = 0; k < 4 * gc_elements; ++k) t.push_back(uniform_int(rng, 0, gc_bins));
          return t;
        };
        ce_batch.push_back({features, draw()});
        pref_batch.push_back({features, draw(), draw()});
      }
      const auto ce = ce_loss_and_grad(params, ce_batch);
      const double ce_err = finite_diff_check(
          [&](const PolicyParams& p) { return ce_loss_and_grad(p, ce_batch).loss; }, params,
          ce.grad, gc_eps, mix_seed(g.seed, 3), gc_probes);
      const auto ap = aapa_loss_and_grad(params, reference, pref_batch);
      const double ap_err = finite_diff_check(
          [&](const PolicyParams& p) { return aapa_loss_and_grad(p, reference, pref_batch).loss; },
          params, ap.grad, gc_eps, mix_seed(g.seed, 4), gc_probes);
      const double worst = std::max(ce_err, ap_err);
      out << fmt::format("ce_max_rel_err={:.3e} aapa_max_rel_err={:.3e} max_rel_err={:.3e} {}\n",
                         ce_err, ap_err, worst, worst < gc_tol ? "ok" : "FAILED");
      if (!(worst < gc_tol)) return 2;
    }
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}

}  // namespace layoutpref::cli
