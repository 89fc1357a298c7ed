#include "layoutpref/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "layoutpref/error.hpp"

namespace layoutpref {
namespace {

std::vector<BBox> predicted_boxes(const Layout& layout) {
  std::vector<BBox> boxes;
  for (const auto& p : layout.placements) {
    if (is_predicted(p.element)) boxes.push_back(p.box);
  }
  return boxes;
}

// Normalized distance from key coordinate k of box i to the same key of the
// nearest other box, minimized over the three keys of one axis.
template <typename KeyFn>
double nearest_key_distance(const std::vector<BBox>& boxes, std::size_t i, double extent,
                            KeyFn keys) {
  double best = std::numeric_limits<double>::infinity();
  const std::array<double, 3> mine = keys(boxes[i]);
  for (std::size_t j = 0; j < boxes.size(); ++j) {
    if (j == i) continue;
    const std::array<double, 3> theirs = keys(boxes[j]);
    for (std::size_t k = 0; k < 3; ++k) {
      best = std::min(best, std::abs(mine[k] - theirs[k]) / extent);
    }
  }
  return best;
}

}  // namespace

double alignment_score(const Layout& layout) {
  const auto boxes = predicted_boxes(layout);
  if (boxes.size() < 2) return 1.0;
  if (!layout.canvas.valid()) throw Error(ErrorCode::kInvalidCanvas, "canvas must be positive");

  const auto f = [](double d) { return std::exp(1.0 - d); };
  const double e = std::numbers::e;
  double total = 0.0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const double dx = nearest_key_distance(boxes, i, layout.canvas.width, [](const BBox& b) {
      return std::array<double, 3>{b.left(), b.x, b.right()};
    });
    const double dy = nearest_key_distance(boxes, i, layout.canvas.height, [](const BBox& b) {
      return std::array<double, 3>{b.top(), b.y, b.bottom()};
    });
    total += (std::min(f(dx), f(dy)) - 1.0) / (e - 1.0);
  }
  return std::clamp(total / static_cast<double>(boxes.size()), 0.0, 1.0);
}

OverlapScore overlap_score(const Layout& layout) {
  const auto boxes = predicted_boxes(layout);
  const std::size_t n = boxes.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(boxes[i].area() > 0.0)) {
      throw Error(ErrorCode::kDegenerateElement, "element with zero area in overlap score");
    }
  }
  if (n < 2) return {};

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum += 1.0 - intersection_area(boxes[i], boxes[j]) / boxes[i].area();
    }
  }
  OverlapScore out;
  out.raw = sum / static_cast<double>(n);
  out.normalized = std::clamp(out.raw / static_cast<double>(n - 1), 0.0, 1.0);
  return out;
}

QualityReport quality(const Layout& layout) {
  QualityReport r;
  r.q_align = alignment_score(layout);
  const OverlapScore o = overlap_score(layout);
  r.q_overlap_raw = o.raw;
  r.q_overlap_norm = o.normalized;
  r.q = (r.q_align + r.q_overlap_norm) / 2.0;
  return r;
}

DatasetQualityStats dataset_stats(std::span<const double> qualities) {
  if (qualities.empty()) throw Error(ErrorCode::kEmptyDataset, "no qualities to summarize");
  const auto n = static_cast<double>(qualities.size());
  // Shifted by the first value so a constant list has exactly zero spread.
  const double shift = qualities.front();
  double sum = 0.0;
  for (double q : qualities) sum += q - shift;
  const double mean = shift + sum / n;
  double ss = 0.0;
  for (double q : qualities) ss += (q - mean) * (q - mean);
  DatasetQualityStats s;
  s.mean = mean;
  s.std = std::sqrt(ss / n);
  s.threshold = s.mean - s.std;
  s.count = qualities.size();
  return s;
}

std::vector<std::size_t> filter_by_threshold(std::span<const double> qualities,
                                             const DatasetQualityStats& stats) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < qualities.size(); ++i) {
    if (qualities[i] > stats.threshold) kept.push_back(i);
  }
  return kept;
}

FilterResult filter_layouts(std::span<const Layout> layouts) {
  if (layouts.empty()) throw Error(ErrorCode::kEmptyDataset, "no layouts to filter");
  FilterResult out;
  out.reports.reserve(layouts.size());
  std::vector<double> qs;
  qs.reserve(layouts.size());
  for (const auto& layout : layouts) {
    out.reports.push_back(quality(layout));
    qs.push_back(out.reports.back().q);
  }
  out.stats = dataset_stats(qs);
  out.kept = filter_by_threshold(qs, out.stats);
  return out;
}

}  // namespace layoutpref
