#include "layoutpref/layout.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "layoutpref/error.hpp"

namespace layoutpref {

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::kImage: return "image";
    case ElementKind::kText: return "text";
    case ElementKind::kShape: return "shape";
    case ElementKind::kBackground: return "background";
  }
  return "shape";
}

ElementKind parse_element_kind(std::string_view name) {
  if (name == "image") return ElementKind::kImage;
  if (name == "text") return ElementKind::kText;
  if (name == "shape") return ElementKind::kShape;
  if (name == "background") return ElementKind::kBackground;
  throw Error(ErrorCode::kParseError, "unknown element kind '" + std::string(name) + "'");
}

void validate(const Element& element) {
  const bool is_text = element.kind == ElementKind::kText;
  if (is_text && !element.text) {
    throw Error(ErrorCode::kSchemaError, "text element '" + element.id + "' has no text");
  }
  if (!is_text && element.text) {
    throw Error(ErrorCode::kSchemaError, "non-text element '" + element.id + "' carries text");
  }
  if (element.intrinsic_aspect && !(*element.intrinsic_aspect > 0.0)) {
    throw Error(ErrorCode::kSchemaError, "element '" + element.id + "' has nonpositive aspect");
  }
}

void validate(const Layout& layout) {
  if (!layout.canvas.valid()) throw Error(ErrorCode::kInvalidCanvas, "canvas must be positive");
  std::unordered_set<std::string> ids;
  for (const auto& p : layout.placements) {
    validate(p.element);
    if (!ids.insert(p.element.id).second) {
      throw Error(ErrorCode::kSchemaError, "duplicate element id '" + p.element.id + "'");
    }
    if (p.box.w < 0.0 || p.box.h < 0.0) {
      throw Error(ErrorCode::kSchemaError, "element '" + p.element.id + "' has negative size");
    }
  }
}

std::vector<Element> predicted_elements(std::span<const Element> elements) {
  std::vector<Element> out;
  for (const auto& e : elements) {
    if (is_predicted(e)) out.push_back(e);
  }
  return out;
}

int bin(double coordinate, double extent, int bins) {
  if (!(extent > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bin extent must be positive");
  if (bins < 1) throw Error(ErrorCode::kInvalidArgument, "bin count must be >= 1");
  const double clamped = std::clamp(coordinate, 0.0, extent);
  const auto token = static_cast<long long>(std::floor(clamped / extent * bins));
  return static_cast<int>(std::clamp<long long>(token, 0, bins));
}

double unbin(int token, double extent, int bins) {
  if (!(extent > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bin extent must be positive");
  if (bins < 1) throw Error(ErrorCode::kInvalidArgument, "bin count must be >= 1");
  if (token < 0 || token > bins) {
    throw Error(ErrorCode::kInvalidToken,
                "token " + std::to_string(token) + " outside [0, " + std::to_string(bins) + "]");
  }
  return std::min((token + 0.5) / bins * extent, extent);
}

TokenizedLayout tokenize_layout(const Layout& layout, int bins) {
  TokenizedLayout out;
  out.bins = bins;
  const double width = layout.canvas.width;
  const double height = layout.canvas.height;
  for (const auto& p : layout.placements) {
    if (!is_predicted(p.element)) continue;
    out.tokens.push_back(bin(p.box.x, width, bins));
    out.tokens.push_back(bin(p.box.y, height, bins));
    out.tokens.push_back(bin(p.box.w, width, bins));
    out.tokens.push_back(bin(p.box.h, height, bins));
  }
  return out;
}

Layout detokenize_layout(const TokenizedLayout& tokens, std::span<const Element> elements,
                         const Canvas& canvas) {
  const auto predicted = static_cast<std::size_t>(
      std::count_if(elements.begin(), elements.end(), [](const Element& e) { return is_predicted(e); }));
  if (tokens.tokens.size() != 4 * predicted) {
    throw Error(ErrorCode::kMalformedOutput,
                std::to_string(tokens.tokens.size()) + " tokens for " + std::to_string(predicted) +
                    " predicted elements");
  }
  Layout out;
  out.canvas = canvas;
  std::size_t cursor = 0;
  for (const auto& e : elements) {
    BBox box{canvas.width / 2.0, canvas.height / 2.0, canvas.width, canvas.height};
    if (is_predicted(e)) {
      const int bins = tokens.bins;
      box.x = unbin(tokens.tokens[cursor], canvas.width, bins);
      box.y = unbin(tokens.tokens[cursor + 1], canvas.height, bins);
      box.w = unbin(tokens.tokens[cursor + 2], canvas.width, bins);
      box.h = unbin(tokens.tokens[cursor + 3], canvas.height, bins);
      cursor += 4;
    }
    out.placements.push_back({e, box});
  }
  return out;
}

double intersection_area(const BBox& a, const BBox& b) {
  const double overlap_w = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double overlap_h = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  return std::max(0.0, overlap_w) * std::max(0.0, overlap_h);
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace layoutpref
