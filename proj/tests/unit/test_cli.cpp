#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "layoutpref/checkpoint.hpp"
#include "layoutpref/image.hpp"
#include "layoutpref/preference.hpp"
#include "support.hpp"

using layoutpref::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit 1, help exits 0") {
  CHECK(call({}).code == 1);
  const auto bad = call({"frobnicate"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("Usage") != std::string::npos);
  CHECK(call({"synth"}).code == 1);
  CHECK(call({"synth", "--out", "x", "--style", "wavy"}).code == 1);
  const auto help = call({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("train-aapa") != std::string::npos);
}

TEST_CASE("runtime failures exit 2") {
  testing::TempDir dir;
  const auto r = call({"stats", "--in", (dir / "missing.jsonl").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("cannot open") != std::string::npos);
}

TEST_CASE("synth, stats and filter") {
  testing::TempDir dir;
  const auto data = (dir / "d.jsonl").string();
  auto r = call({"--seed", "3", "synth", "--n", "20", "--style", "jittered", "--out", data});
  REQUIRE(r.code == 0);
  CHECK(layoutpref::load_dataset(data).size() == 20);

  r = call({"stats", "--in", data, "--csv", (dir / "q.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("id,q_align,q_overlap_raw,q_overlap_norm,q,kept\n", 0) == 0);
  CHECK(r.out.find("# count=20") != std::string::npos);
  CHECK(slurp(dir / "q.csv").size() > 100);

  r = call({"filter", "--in", data, "--out", (dir / "f.jsonl").string()});
  REQUIRE(r.code == 0);
  const auto kept = layoutpref::load_dataset(dir / "f.jsonl").size();
  CHECK(kept > 0);
  CHECK(kept < 20);

  call({"synth", "--n", "5", "--out", (dir / "g.jsonl").string()});
  r = call({"stats", "--in", (dir / "g.jsonl").string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("std is 0") != std::string::npos);
}

TEST_CASE("config file overrides flags") {
  testing::TempDir dir;
  {
    std::ofstream cfg(dir / "c.conf");
    cfg << "# comment\nn = 7\n";
  }
  const auto data = (dir / "d.jsonl").string();
  auto r = call({"synth", "--n", "3", "--out", data, "--config", (dir / "c.conf").string()});
  REQUIRE(r.code == 0);
  CHECK(layoutpref::load_dataset(data).size() == 7);
  CHECK(r.err.find("n=7") != std::string::npos);
  {
    std::ofstream cfg(dir / "bad.conf");
    cfg << "colour=red\n";
  }
  CHECK(call({"synth", "--out", data, "--config", (dir / "bad.conf").string()}).code == 1);
}

TEST_CASE("pipeline end to end") {
  testing::TempDir dir;
  const auto p = [&](const char* name) { return (dir / name).string(); };
  REQUIRE(call({"synth", "--n", "30", "--out", p("d.jsonl")}).code == 0);
  auto r = call({"train-ce", "--data", p("d.jsonl"), "--out", p("ce.bin"), "--bins", "32", "--steps",
                 "20", "--batch", "4", "--log-every", "10"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("step,lr,loss\n1,", 0) == 0);
  CHECK(layoutpref::load_manifest(p("ce.bin")).at("data") == "d.jsonl");

  r = call({"--threads", "2", "pair", "--data", p("d.jsonl"), "--policy", p("ce.bin"), "--out",
            p("pairs.jsonl"), "--attempts", "2", "--cache", p("cache.jsonl")});
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(r.out);
  CHECK(summary["attempts"] == 60);
  REQUIRE(summary["kept"].get<int>() > 0);

  r = call({"train-aapa", "--pairs", p("pairs.jsonl"), "--policy", p("ce.bin"), "--out", p("ap.bin"),
            "--steps", "5", "--batch", "4"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\n1,0.01,0.693147\n") != std::string::npos);

  r = call({"eval-iou", "--data", p("d.jsonl"), "--oracle", "--mode", "single", "--csv", p("i.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("miou=100.0000") != std::string::npos);
  r = call({"eval-iou", "--data", p("d.jsonl"), "--policy", p("ap.bin")});
  CHECK(r.code == 0);
  r = call({"eval-winrate", "--data", p("d.jsonl"), "--oracle"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("win_rate=0.0000") != std::string::npos);
  CHECK(call({"eval-iou", "--data", p("d.jsonl")}).code == 1);

  r = call({"render", "--input", p("d.jsonl"), "--out", p("x.png"), "--size", "128"});
  REQUIRE(r.code == 0);
  const auto img = layoutpref::read_png(p("x.png"));
  CHECK(std::max(img.width(), img.height()) == 128);
  CHECK(call({"render", "--data", p("d.jsonl"), "--sample", "nope", "--out", p("y.png")}).code == 2);
  CHECK(call({"render", "--data", p("d.jsonl"), "--policy", p("ap.bin"), "--background", p("x.png"),
              "--out", p("z.png")})
            .code == 0);
}

TEST_CASE("gradcheck command") {
  auto r = call({"gradcheck", "--probes", "64"});
  CHECK(r.code == 0);
  CHECK(r.out.find(" ok") != std::string::npos);
}
