#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "layoutpref/layout.hpp"

namespace layoutpref {

struct SampleElement {
  Element element;
  std::optional<BBox> gt_bbox;

  bool operator==(const SampleElement&) const = default;
};

struct DatasetSample {
  std::string id;
  Canvas canvas;
  std::vector<SampleElement> elements;

  std::vector<Element> element_list() const;
  bool has_ground_truth() const;
  /// Ground-truth layout; throws Error(kSchemaError) if any bbox is missing.
  Layout ground_truth() const;

  bool operator==(const DatasetSample&) const = default;
};

nlohmann::ordered_json to_json(const DatasetSample& sample);
/// Throws Error(kParseError) for a structurally invalid record and
/// Error(kSchemaError) for an invariant violation.
DatasetSample sample_from_json(const nlohmann::json& record);

nlohmann::ordered_json element_descriptor(const Element& element);
Element element_from_descriptor(const nlohmann::json& descriptor);

/// One JSON record per line; blank lines are ignored. Errors name the line.
std::vector<DatasetSample> load_dataset(const std::filesystem::path& path);
/// Canonical field order, deterministic bytes.
void save_dataset(const std::vector<DatasetSample>& samples, const std::filesystem::path& path);

enum class SyntheticStyle { kGridAligned, kJittered, kRandom };

SyntheticStyle parse_synthetic_style(std::string_view name);
std::string_view to_string(SyntheticStyle style);

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int n_samples = 100;
  std::pair<int, int> elements_per_sample{4, 6};
  SyntheticStyle style = SyntheticStyle::kGridAligned;
  std::vector<std::pair<double, double>> canvas_sizes{{400, 400}, {400, 600}, {600, 400}};
  /// Half-width of the uniform per-attribute noise of the jittered style, in pixels.
  double jitter_px = 12.0;
  /// Probability of a full-canvas background element at the start of a sample.
  double background_probability = 0.25;
  std::string id_prefix = "syn";
};

/// grid_aligned samples tile the canvas so every element shares an x key and
/// a y key with another element and no two elements overlap (quality 1);
/// counts below 4 cannot satisfy both and are raised to 4. jittered adds
/// uniform pixel noise to grid layouts; random places boxes uniformly.
std::vector<DatasetSample> make_synthetic(const SyntheticSpec& spec);

/// Replaces a seeded `fraction` of the samples' boxes by a collapsed layout in
/// which every element is stacked on the same box.
void salt_degenerate(std::vector<DatasetSample>& samples, double fraction, std::uint64_t seed);

}  // namespace layoutpref
