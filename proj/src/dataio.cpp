#include "layoutpref/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

#include "layoutpref/error.hpp"
#include "layoutpref/random.hpp"

namespace layoutpref {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<Element> DatasetSample::element_list() const {
  std::vector<Element> out;
  out.reserve(elements.size());
  for (const auto& e : elements) out.push_back(e.element);
  return out;
}

bool DatasetSample::has_ground_truth() const {
  return std::all_of(elements.begin(), elements.end(),
                     [](const SampleElement& e) { return e.gt_bbox.has_value(); });
}

Layout DatasetSample::ground_truth() const {
  Layout out;
  out.canvas = canvas;
  for (const auto& e : elements) {
    if (!e.gt_bbox) {
      throw Error(ErrorCode::kSchemaError, "sample '" + id + "' element '" + e.element.id +
                                               "' has no ground-truth box");
    }
    out.placements.push_back({e.element, *e.gt_bbox});
  }
  return out;
}

ordered_json element_descriptor(const Element& element) {
  ordered_json out;
  out["id"] = element.id;
  out["kind"] = std::string(to_string(element.kind));
  if (element.text) out["text"] = *element.text;
  if (element.asset_ref) out["asset"] = *element.asset_ref;
  if (element.intrinsic_aspect) out["aspect"] = *element.intrinsic_aspect;
  return out;
}

Element element_from_descriptor(const json& d) {
  if (!d.is_object()) throw Error(ErrorCode::kParseError, "element must be an object");
  if (!d.contains("id") || !d["id"].is_string()) {
    throw Error(ErrorCode::kParseError, "element missing string 'id'");
  }
  if (!d.contains("kind") || !d["kind"].is_string()) {
    throw Error(ErrorCode::kParseError, "element missing string 'kind'");
  }
  Element e;
  e.id = d["id"].get<std::string>();
  e.kind = parse_element_kind(d["kind"].get<std::string>());
  if (d.contains("text")) {
    if (!d["text"].is_string()) throw Error(ErrorCode::kParseError, "'text' must be a string");
    e.text = d["text"].get<std::string>();
  }
  if (d.contains("asset")) {
    if (!d["asset"].is_string()) throw Error(ErrorCode::kParseError, "'asset' must be a string");
    e.asset_ref = d["asset"].get<std::string>();
  }
  if (d.contains("aspect")) {
    if (!d["aspect"].is_number()) throw Error(ErrorCode::kParseError, "'aspect' must be a number");
    e.intrinsic_aspect = d["aspect"].get<double>();
  }
  validate(e);
  return e;
}

ordered_json to_json(const DatasetSample& sample) {
  ordered_json out;
  out["id"] = sample.id;
  out["canvas"] = {{"w", sample.canvas.width}, {"h", sample.canvas.height}};
  ordered_json elements = ordered_json::array();
  for (const auto& e : sample.elements) {
    ordered_json record = element_descriptor(e.element);
    if (e.gt_bbox) {
      record["bbox"] = {e.gt_bbox->x, e.gt_bbox->y, e.gt_bbox->w, e.gt_bbox->h};
    }
    elements.push_back(std::move(record));
  }
  out["elements"] = std::move(elements);
  return out;
}

DatasetSample sample_from_json(const json& record) {
  if (!record.is_object()) throw Error(ErrorCode::kParseError, "record must be an object");
  if (!record.contains("id") || !record["id"].is_string()) {
    throw Error(ErrorCode::kParseError, "record missing string 'id'");
  }
  if (!record.contains("canvas") || !record["canvas"].is_object()) {
    throw Error(ErrorCode::kParseError, "record missing 'canvas'");
  }
  const json& canvas = record["canvas"];
  if (!canvas.contains("w") || !canvas.contains("h") || !canvas["w"].is_number() ||
      !canvas["h"].is_number()) {
    throw Error(ErrorCode::kParseError, "canvas needs numeric 'w' and 'h'");
  }
  DatasetSample s;
  s.id = record["id"].get<std::string>();
  s.canvas = {canvas["w"].get<double>(), canvas["h"].get<double>()};
  if (!s.canvas.valid()) throw Error(ErrorCode::kSchemaError, "canvas must be positive");
  if (!record.contains("elements") || !record["elements"].is_array()) {
    throw Error(ErrorCode::kParseError, "record missing 'elements' array");
  }
  std::unordered_set<std::string> ids;
  for (const auto& d : record["elements"]) {
    SampleElement se;
    se.element = element_from_descriptor(d);
    if (!ids.insert(se.element.id).second) {
      throw Error(ErrorCode::kSchemaError, "duplicate element id '" + se.element.id + "'");
    }
    if (d.contains("bbox")) {
      const json& b = d["bbox"];
      if (!b.is_array() || b.size() != 4 ||
          !std::all_of(b.begin(), b.end(), [](const json& v) { return v.is_number(); })) {
        throw Error(ErrorCode::kParseError, "'bbox' must be four numbers");
      }
      se.gt_bbox = BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                        b[3].get<double>()};
      if (se.gt_bbox->w < 0.0 || se.gt_bbox->h < 0.0) {
        throw Error(ErrorCode::kSchemaError, "negative bbox size for '" + se.element.id + "'");
      }
    }
    s.elements.push_back(std::move(se));
  }
  return s;
}

std::vector<DatasetSample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open dataset " + path.string());
  std::vector<DatasetSample> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    DatasetSample s;
    try {
      s = sample_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, where + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
    if (!ids.insert(s.id).second) {
      throw Error(ErrorCode::kSchemaError, where + "duplicate sample id '" + s.id + "'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

void save_dataset(const std::vector<DatasetSample>& samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write dataset " + path.string());
  for (const auto& s : samples) out << to_json(s).dump() << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

SyntheticStyle parse_synthetic_style(std::string_view name) {
  if (name == "grid_aligned") return SyntheticStyle::kGridAligned;
  if (name == "jittered") return SyntheticStyle::kJittered;
  if (name == "random") return SyntheticStyle::kRandom;
  throw Error(ErrorCode::kInvalidArgument, "unknown synthetic style '" + std::string(name) + "'");
}

std::string_view to_string(SyntheticStyle style) {
  switch (style) {
    case SyntheticStyle::kGridAligned: return "grid_aligned";
    case SyntheticStyle::kJittered: return "jittered";
    case SyntheticStyle::kRandom: return "random";
  }
  return "grid_aligned";
}

namespace {

constexpr double kMargin = 0.08;
constexpr double kGap = 0.04;

const char* const kWords[] = {"SUMMER SALE", "NEW ARRIVALS", "Lorem ipsum", "Join us today",
                              "50% OFF",     "Grand opening", "Shop now",  "Limited edition"};

struct UnitBox {
  double left, top, right, bottom;
};

// Normalized cells for n >= 4 elements, laid out as a staircase so that each
// position attribute changes in contiguous runs along the element index:
// cell j of the stair sits at row floor(j / 2), column ceil(j / 2), so it
// shares a row or a column with each neighbour. One (even n) or two (odd n)
// half-width closing cells on the stair's last row, in the first column,
// give the first and last stair cells their missing partners: the left half
// shares its left edge with cell 0, the right half its right edge.
std::vector<UnitBox> grid_cells(int n) {
  const int stair = n % 2 == 0 ? n - 1 : n - 2;
  const int last_row = (stair - 1) / 2;
  const int rows = last_row + 1;
  const int cols = stair / 2 + 1;
  const double usable = 1.0 - 2 * kMargin;
  const double row_h = (usable - (rows - 1) * kGap) / rows;
  const double col_w = (usable - (cols - 1) * kGap) / cols;
  const auto cell = [&](int r, int c) {
    const double left = kMargin + c * (col_w + kGap);
    const double top = kMargin + r * (row_h + kGap);
    return UnitBox{left, top, left + col_w, top + row_h};
  };

  std::vector<UnitBox> cells;
  for (int j = 0; j < stair; ++j) cells.push_back(cell(j / 2, (j + 1) / 2));
  const UnitBox corner = cell(last_row, 0);
  const double half = (col_w - kGap) / 2;
  cells.push_back({corner.left, corner.top, corner.left + half, corner.bottom});
  if (n % 2 == 1) cells.push_back({corner.right - half, corner.top, corner.right, corner.bottom});
  return cells;
}

Element make_element(std::mt19937_64& rng, int index, double box_aspect) {
  Element e;
  e.id = "e" + std::to_string(index);
  const double roll = uniform01(rng);
  if (roll < 0.45) {
    e.kind = ElementKind::kText;
    e.text = kWords[uniform_int(rng, 0, static_cast<int>(std::size(kWords)) - 1)];
  } else if (roll < 0.8) {
    e.kind = ElementKind::kImage;
    e.intrinsic_aspect = std::round(box_aspect * 1000.0) / 1000.0;
  } else {
    e.kind = ElementKind::kShape;
  }
  return e;
}

DatasetSample make_one(const SyntheticSpec& spec, int index) {
  std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(index)));
  DatasetSample s;
  s.id = spec.id_prefix + "-" + std::to_string(index);
  const auto& size = spec.canvas_sizes[static_cast<std::size_t>(
      uniform_int(rng, 0, static_cast<int>(spec.canvas_sizes.size()) - 1))];
  s.canvas = {size.first, size.second};
  const double W = s.canvas.width, H = s.canvas.height;
  int n = uniform_int(rng, spec.elements_per_sample.first, spec.elements_per_sample.second);
  if (spec.style != SyntheticStyle::kRandom) n = std::max(n, 4);

  if (uniform01(rng) < spec.background_probability) {
    SampleElement bg;
    bg.element.id = "bg";
    bg.element.kind = ElementKind::kBackground;
    bg.gt_bbox = BBox{W / 2, H / 2, W, H};
    s.elements.push_back(std::move(bg));
  }

  std::vector<BBox> boxes;
  if (spec.style == SyntheticStyle::kRandom) {
    for (int i = 0; i < n; ++i) {
      const double w = uniform(rng, 0.1, 0.5) * W;
      const double h = uniform(rng, 0.1, 0.5) * H;
      boxes.push_back({uniform(rng, w / 2, W - w / 2), uniform(rng, h / 2, H - h / 2), w, h});
    }
  } else {
    for (const auto& c : grid_cells(n)) {
      boxes.push_back({(c.left + c.right) / 2 * W, (c.top + c.bottom) / 2 * H,
                       (c.right - c.left) * W, (c.bottom - c.top) * H});
    }
  }

  for (int i = 0; i < n; ++i) {
    SampleElement se;
    se.element = make_element(rng, i, boxes[i].w / boxes[i].h);
    BBox b = boxes[i];
    if (spec.style == SyntheticStyle::kJittered) {
      const double j = spec.jitter_px;
      b.x += uniform(rng, -j, j);
      b.y += uniform(rng, -j, j);
      b.w = std::max(1.0, b.w + uniform(rng, -j, j));
      b.h = std::max(1.0, b.h + uniform(rng, -j, j));
    }
    se.gt_bbox = b;
    s.elements.push_back(std::move(se));
  }
  return s;
}

}  // namespace

std::vector<DatasetSample> make_synthetic(const SyntheticSpec& spec) {
  if (spec.n_samples < 1) throw Error(ErrorCode::kInvalidArgument, "n_samples must be >= 1");
  if (spec.canvas_sizes.empty()) throw Error(ErrorCode::kInvalidArgument, "no canvas sizes");
  if (spec.elements_per_sample.first < 1 ||
      spec.elements_per_sample.second < spec.elements_per_sample.first) {
    throw Error(ErrorCode::kInvalidArgument, "bad elements_per_sample range");
  }
  std::vector<DatasetSample> out;
  out.reserve(static_cast<std::size_t>(spec.n_samples));
  for (int i = 0; i < spec.n_samples; ++i) out.push_back(make_one(spec, i));
  return out;
}

void salt_degenerate(std::vector<DatasetSample>& samples, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(mix_seed(seed, 0xDE6));
  std::shuffle(order.begin(), order.end(), rng);
  const auto count = static_cast<std::size_t>(std::llround(fraction * samples.size()));
  for (std::size_t k = 0; k < std::min(count, samples.size()); ++k) {
    DatasetSample& s = samples[order[k]];
    const double W = s.canvas.width, H = s.canvas.height;
    const double w = uniform(rng, 0.2, 0.6) * W;
    const double h = uniform(rng, 0.2, 0.6) * H;
    const BBox stacked{uniform(rng, w / 2, W - w / 2), uniform(rng, h / 2, H - h / 2), w, h};
    for (auto& e : s.elements) {
      if (is_predicted(e.element)) e.gt_bbox = stacked;
    }
  }
}

}  // namespace layoutpref
