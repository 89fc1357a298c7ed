#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "layoutpref/layout.hpp"

namespace layoutpref {

struct QualityReport {
  double q_align = 1.0;
  double q_overlap_raw = 1.0;   // unnormalized sum form, grows with element count
  double q_overlap_norm = 1.0;  // raw / (N - 1), in [0, 1]
  double q = 1.0;               // (q_align + q_overlap_norm) / 2
};

struct DatasetQualityStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double threshold = 0.0;
  std::size_t count = 0;
};

struct OverlapScore {
  double raw = 1.0;
  double normalized = 1.0;
};

struct FilterResult {
  std::vector<std::size_t> kept;
  std::vector<QualityReport> reports;
  DatasetQualityStats stats;
};

/// Exponential-decay alignment score over non-background elements.
///
/// For each element the nearest same-kind key coordinate (left/center/right
/// on x, top/center/bottom on y) of any other element is found, distances are
/// normalized by the canvas extent, f(d) = exp(1 - d) is applied, and the worse
/// axis is kept. Scores are mapped to [0, 1] by (f - 1) / (e - 1).
/// Fewer than two elements score 1.
double alignment_score(const Layout& layout);

/// Mean non-overlap of each element against every other element. Throws
/// Error(kDegenerateElement) for a zero-area non-background element.
OverlapScore overlap_score(const Layout& layout);

QualityReport quality(const Layout& layout);

/// Throws Error(kEmptyDataset) on an empty list.
DatasetQualityStats dataset_stats(std::span<const double> qualities);

/// Keeps indices whose quality is strictly above mean - std.
std::vector<std::size_t> filter_by_threshold(std::span<const double> qualities,
                                             const DatasetQualityStats& stats);

FilterResult filter_layouts(std::span<const Layout> layouts);

}  // namespace layoutpref
