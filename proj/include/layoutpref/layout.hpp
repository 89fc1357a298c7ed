#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace layoutpref {

/// Default number of position bins (the alphabet has kDefaultBins + 1 tokens).
inline constexpr int kDefaultBins = 224;

struct Canvas {
  double width = 0.0;
  double height = 0.0;

  bool valid() const { return width > 0.0 && height > 0.0; }
  bool operator==(const Canvas&) const = default;
};

enum class ElementKind { kImage, kText, kShape, kBackground };

inline constexpr int kNumElementKinds = 4;

std::string_view to_string(ElementKind kind);
/// Throws Error(kParseError) on an unknown name.
ElementKind parse_element_kind(std::string_view name);

struct Element {
  std::string id;
  ElementKind kind = ElementKind::kShape;
  std::optional<std::string> text;       // present iff kind == kText
  std::optional<std::string> asset_ref;  // file path for non-text kinds
  std::optional<double> intrinsic_aspect;

  bool operator==(const Element&) const = default;
};

/// Center-format box in pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return x - w / 2.0; }
  double right() const { return x + w / 2.0; }
  double top() const { return y - h / 2.0; }
  double bottom() const { return y + h / 2.0; }
  double area() const { return w * h; }

  bool operator==(const BBox&) const = default;
};

struct Placement {
  Element element;
  BBox box;

  bool operator==(const Placement&) const = default;
};

/// A canvas plus placed elements; placement order is the draw order.
struct Layout {
  Canvas canvas;
  std::vector<Placement> placements;

  bool operator==(const Layout&) const = default;
};

/// Position tokens grouped (x, y, w, h) per predicted element, each in [0, bins].
struct TokenizedLayout {
  std::vector<int> tokens;
  int bins = kDefaultBins;

  std::size_t element_count() const { return tokens.size() / 4; }
  bool operator==(const TokenizedLayout&) const = default;
};

/// Fixed (x, y, w, h) tokens for elements whose position is given as context.
using KnownPositions = std::map<std::string, std::array<int, 4>>;

/// Checks unique ids, the text/kind rule and nonnegative box sizes.
void validate(const Layout& layout);
void validate(const Element& element);

inline bool is_predicted(const Element& e) { return e.kind != ElementKind::kBackground; }

/// Non-background elements, in order.
std::vector<Element> predicted_elements(std::span<const Element> elements);

int bin(double coordinate, double extent, int bins);
double unbin(int token, double extent, int bins);

TokenizedLayout tokenize_layout(const Layout& layout, int bins = kDefaultBins);

/// Inverse of tokenize_layout. Tokens are consumed by the non-background
/// elements in order; background elements are placed over the whole canvas.
Layout detokenize_layout(const TokenizedLayout& tokens, std::span<const Element> elements,
                         const Canvas& canvas);

double intersection_area(const BBox& a, const BBox& b);
double iou(const BBox& a, const BBox& b);

}  // namespace layoutpref
