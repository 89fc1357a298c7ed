#include <doctest.h>

#include <fstream>

#include "layoutpref/error.hpp"
#include "layoutpref/eval.hpp"
#include "layoutpref/metrics.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using namespace layoutpref;

namespace {

std::vector<DatasetSample> corpus(int n = 30) {
  SyntheticSpec spec;
  spec.n_samples = n;
  spec.seed = 2;
  return make_synthetic(spec);
}

// Unit boxes on a lattice; every box is later shifted by half its width.
std::vector<DatasetSample> unit_boxes() {
  std::vector<DatasetSample> out;
  for (int k = 0; k < 3; ++k) {
    Layout l;
    l.canvas = {10, 10};
    for (int i = 0; i <= k; ++i) {
      l.placements.push_back(testing::place(testing::shape("s" + std::to_string(i)), 1 + 3 * i, 2, 1, 1));
    }
    out.push_back(testing::sample_of("u" + std::to_string(k), l));
  }
  return out;
}

class HalfShift : public Predictor {
 public:
  Layout predict(const DatasetSample& s, const KnownPositions&) const override {
    Layout l = s.ground_truth();
    for (auto& p : l.placements) p.box.x += p.box.w / 2;
    return l;
  }
};

// Disjoint boxes in one row, whatever the ground truth.
class Tidy : public Predictor {
 public:
  Layout predict(const DatasetSample& s, const KnownPositions&) const override {
    Layout l = s.ground_truth();
    const double w = s.canvas.width / (2.0 * static_cast<double>(l.placements.size()));
    for (std::size_t i = 0; i < l.placements.size(); ++i) {
      l.placements[i].box = {w * (2.0 * static_cast<double>(i) + 0.5), s.canvas.height / 4, w, s.canvas.height / 4};
    }
    return l;
  }
};

std::size_t text_count(const std::vector<DatasetSample>& c) {
  std::size_t n = 0;
  for (const auto& s : c) {
    for (const auto& e : s.elements) n += e.element.kind == ElementKind::kText;
  }
  return n;
}

}  // namespace

TEST_CASE("oracle scores 100 in every mode") {
  const auto c = corpus();
  const GroundTruthPredictor oracle;
  for (auto mode : {EvalMode::kAll, EvalMode::kSingle, EvalMode::kMultiple}) {
    CHECK(mean_iou(c, oracle, mode).mean_iou_percent == doctest::Approx(100.0));
  }
  CHECK(mean_iou(c, oracle, EvalMode::kSingle).n_instances == text_count(c));
  CHECK(mean_iou(c, oracle, EvalMode::kAll).n_instances == c.size());
}

TEST_CASE("half-width shift scores one third") {
  const auto r = mean_iou(unit_boxes(), HalfShift{}, EvalMode::kAll);
  CHECK(r.mean_iou_percent == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
  CHECK(r.n_instances == 3);
}

TEST_CASE("modes without targets") {
  const auto boxes = unit_boxes();
  CHECK_THROWS_AS(mean_iou(boxes, GroundTruthPredictor{}, EvalMode::kSingle), Error);
  auto c = corpus(5);
  c.push_back(boxes[0]);
  const auto r = mean_iou(c, GroundTruthPredictor{}, EvalMode::kMultiple);
  CHECK(r.skipped_samples == 1);
  c[0].elements[0].gt_bbox.reset();
  CHECK_THROWS_AS(mean_iou(c, GroundTruthPredictor{}, EvalMode::kAll), Error);
}

TEST_CASE("policy predictor keeps known elements") {
  const auto c = corpus(10);
  const PolicyParams p(224);
  const PolicyPredictor pred(p);
  // Known tokens are written back, so the fixed elements reproduce the
  // binned ground truth and only the text boxes can disagree.
  const auto& s = c[0];
  KnownPositions known;
  for (const auto& e : s.elements) {
    if (e.element.kind == ElementKind::kText || !is_predicted(e.element)) continue;
    const BBox& g = *e.gt_bbox;
    known[e.element.id] = {bin(g.x, s.canvas.width, 224), bin(g.y, s.canvas.height, 224),
                           bin(g.w, s.canvas.width, 224), bin(g.h, s.canvas.height, 224)};
  }
  const Layout l = pred.predict(s, known);
  for (const auto& e : s.elements) {
    if (!known.count(e.element.id)) continue;
    for (const auto& pl : l.placements) {
      if (pl.element.id == e.element.id) CHECK(iou(pl.box, *e.gt_bbox) > 0.9);
    }
  }
}

TEST_CASE("win rate: tie rule and strict improvement") {
  const auto c = corpus();
  HeuristicJudge judge;
  CHECK(*win_rate(c, GroundTruthPredictor{}, judge).win_rate_percent == 0.0);

  std::vector<DatasetSample> stacked;
  for (const auto& s : c) {
    DatasetSample t = s;
    for (auto& e : t.elements) {
      if (is_predicted(e.element)) e.gt_bbox = BBox{s.canvas.width / 2, s.canvas.height / 2, 50, 50};
    }
    stacked.push_back(t);
  }
  const Tidy tidy;
  for (const auto& s : stacked) {
    REQUIRE(quality(tidy.predict(s, {})).q > quality(s.ground_truth()).q);
  }
  const auto r = win_rate(stacked, tidy, judge);
  CHECK(*r.win_rate_percent == 100.0);
  CHECK(r.n_instances == stacked.size());
}

TEST_CASE("win rate with a remote judge") {
  testing::StubJudgeServer stub;
  JudgeConfig cfg;
  cfg.endpoint = stub.endpoint();
  cfg.model_name = "m";
  cfg.retry_backoff = std::chrono::milliseconds(0);
  cfg.max_retries = 0;
  RenderStyle style;
  style.target_long_side = 64;
  RemoteJudge judge(cfg, style);
  const auto c = corpus(4);
  stub.always(R"({"better_layout": "image_2"})");
  CHECK(*win_rate(c, GroundTruthPredictor{}, judge).win_rate_percent == 0.0);
  stub.always(R"({"better_layout": "image_1"})");
  CHECK(*win_rate(c, GroundTruthPredictor{}, judge).win_rate_percent == 100.0);

  stub.script({{200, R"({"better_layout": "image_1"})"}, {500, ""}});
  const auto r = win_rate(c, GroundTruthPredictor{}, judge);
  CHECK(r.failures == 3);
  CHECK(r.n_instances == 1);
  CHECK(*r.win_rate_percent == 100.0);

  stub.always("nothing useful");
  CHECK_THROWS_AS(win_rate(c, GroundTruthPredictor{}, judge), Error);
}

TEST_CASE("instance csv") {
  testing::TempDir dir;
  const auto r = mean_iou(unit_boxes(), HalfShift{}, EvalMode::kAll);
  write_instances_csv(r, dir / "i.csv");
  std::ifstream in(dir / "i.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "instance_id,score");
  CHECK(first.rfind("u0,0.3333333333333333", 0) == 0);
  CHECK(r.summary_line().find("mode=all") == 0);
  CHECK(parse_eval_mode("multiple") == EvalMode::kMultiple);
  CHECK_THROWS_AS(parse_eval_mode("some"), Error);
}
