#include "layoutpref/render.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>

#include "layoutpref/error.hpp"

namespace layoutpref {
namespace {

// 5x7 column-major glyphs for ' ' .. 'Z'; bit 0 is the top row.
constexpr std::uint8_t kFont5x7[][5] = {
    {0x00, 0x00, 0x00, 0x00, 0x00}, {0x00, 0x00, 0x5F, 0x00, 0x00}, {0x00, 0x07, 0x00, 0x07, 0x00},
    {0x14, 0x7F, 0x14, 0x7F, 0x14}, {0x24, 0x2A, 0x7F, 0x2A, 0x12}, {0x23, 0x13, 0x08, 0x64, 0x62},
    {0x36, 0x49, 0x55, 0x22, 0x50}, {0x00, 0x05, 0x03, 0x00, 0x00}, {0x00, 0x1C, 0x22, 0x41, 0x00},
    {0x00, 0x41, 0x22, 0x1C, 0x00}, {0x08, 0x2A, 0x1C, 0x2A, 0x08}, {0x08, 0x08, 0x3E, 0x08, 0x08},
    {0x00, 0x50, 0x30, 0x00, 0x00}, {0x08, 0x08, 0x08, 0x08, 0x08}, {0x00, 0x60, 0x60, 0x00, 0x00},
    {0x20, 0x10, 0x08, 0x04, 0x02}, {0x3E, 0x51, 0x49, 0x45, 0x3E}, {0x00, 0x42, 0x7F, 0x40, 0x00},
    {0x42, 0x61, 0x51, 0x49, 0x46}, {0x21, 0x41, 0x45, 0x4B, 0x31}, {0x18, 0x14, 0x12, 0x7F, 0x10},
    {0x27, 0x45, 0x45, 0x45, 0x39}, {0x3C, 0x4A, 0x49, 0x49, 0x30}, {0x01, 0x71, 0x09, 0x05, 0x03},
    {0x36, 0x49, 0x49, 0x49, 0x36}, {0x06, 0x49, 0x49, 0x29, 0x1E}, {0x00, 0x36, 0x36, 0x00, 0x00},
    {0x00, 0x56, 0x36, 0x00, 0x00}, {0x08, 0x14, 0x22, 0x41, 0x00}, {0x14, 0x14, 0x14, 0x14, 0x14},
    {0x00, 0x41, 0x22, 0x14, 0x08}, {0x02, 0x01, 0x51, 0x09, 0x06}, {0x32, 0x49, 0x79, 0x41, 0x3E},
    {0x7E, 0x11, 0x11, 0x11, 0x7E}, {0x7F, 0x49, 0x49, 0x49, 0x36}, {0x3E, 0x41, 0x41, 0x41, 0x22},
    {0x7F, 0x41, 0x41, 0x22, 0x1C}, {0x7F, 0x49, 0x49, 0x49, 0x41}, {0x7F, 0x09, 0x09, 0x01, 0x01},
    {0x3E, 0x41, 0x41, 0x51, 0x32}, {0x7F, 0x08, 0x08, 0x08, 0x7F}, {0x00, 0x41, 0x7F, 0x41, 0x00},
    {0x20, 0x40, 0x41, 0x3F, 0x01}, {0x7F, 0x08, 0x14, 0x22, 0x41}, {0x7F, 0x40, 0x40, 0x40, 0x40},
    {0x7F, 0x02, 0x04, 0x02, 0x7F}, {0x7F, 0x04, 0x08, 0x10, 0x7F}, {0x3E, 0x41, 0x41, 0x41, 0x3E},
    {0x7F, 0x09, 0x09, 0x09, 0x06}, {0x3E, 0x41, 0x51, 0x21, 0x5E}, {0x7F, 0x09, 0x19, 0x29, 0x46},
    {0x46, 0x49, 0x49, 0x49, 0x31}, {0x01, 0x01, 0x7F, 0x01, 0x01}, {0x3F, 0x40, 0x40, 0x40, 0x3F},
    {0x1F, 0x20, 0x40, 0x20, 0x1F}, {0x7F, 0x20, 0x18, 0x20, 0x7F}, {0x63, 0x14, 0x08, 0x14, 0x63},
    {0x03, 0x04, 0x78, 0x04, 0x03}, {0x61, 0x51, 0x49, 0x45, 0x43},
};

constexpr std::size_t kMaxPlaceholderChars = 20;
constexpr Rgba kGlyphColor{32, 32, 32, 255};
constexpr std::uint8_t kBoxFillAlpha = 96;
constexpr int kBorderPx = 2;

const std::uint8_t* glyph_for(char c) {
  const auto u = static_cast<unsigned char>(std::toupper(static_cast<unsigned char>(c)));
  if (u < 0x20 || u > 0x5A) return kFont5x7['?' - 0x20];
  return kFont5x7[u - 0x20];
}

struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
};

PixelRect to_pixels(const BBox& box, const Canvas& canvas, int cols, int rows) {
  const double sx = cols / canvas.width;
  const double sy = rows / canvas.height;
  const auto snap = [](double v, int hi) {
    return static_cast<int>(std::clamp<long long>(std::llround(v), 0, hi));
  };
  return {snap(box.left() * sx, cols), snap(box.top() * sy, rows), snap(box.right() * sx, cols),
          snap(box.bottom() * sy, rows)};
}

void fill(Image& img, const PixelRect& r, Rgba c) {
  for (int y = r.y0; y < r.y1; ++y) {
    for (int x = r.x0; x < r.x1; ++x) img.blend(x, y, c);
  }
}

void blit_scaled(Image& img, const PixelRect& r, const Image& src) {
  if (r.empty() || src.empty()) return;
  const Image scaled = resize_nearest(src, r.width(), r.height());
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) img.blend(r.x0 + x, r.y0 + y, scaled.at(x, y));
  }
}

void draw_placeholder_text(Image& img, const PixelRect& r, const std::string& text) {
  const std::string shown = text.substr(0, kMaxPlaceholderChars);
  if (shown.empty() || r.empty()) return;
  const int pad = std::max(1, r.height() / 8);
  int scale = std::max(1, (r.height() - 2 * pad) / 7);
  const int max_by_width =
      (r.width() - 2 * pad) / static_cast<int>(6 * shown.size());
  scale = std::max(1, std::min(scale, max_by_width));
  const int origin_x = r.x0 + pad;
  const int origin_y = r.y0 + (r.height() - 7 * scale) / 2;
  for (std::size_t i = 0; i < shown.size(); ++i) {
    const std::uint8_t* g = glyph_for(shown[i]);
    const int gx = origin_x + static_cast<int>(i) * 6 * scale;
    for (int col = 0; col < 5; ++col) {
      for (int row = 0; row < 7; ++row) {
        if (!((g[col] >> row) & 1)) continue;
        for (int dy = 0; dy < scale; ++dy) {
          for (int dx = 0; dx < scale; ++dx) {
            const int px = gx + col * scale + dx;
            const int py = origin_y + row * scale + dy;
            if (px >= r.x0 && px < r.x1 && py >= r.y0 && py < r.y1) img.set(px, py, kGlyphColor);
          }
        }
      }
    }
  }
}

void check_style(const RenderStyle& style) {
  if (style.target_long_side < 64) {
    throw Error(ErrorCode::kInvalidArgument, "target_long_side must be >= 64");
  }
}

}  // namespace

RenderMode parse_render_mode(std::string_view name) {
  if (name == "boxes") return RenderMode::kBoxes;
  if (name == "composite") return RenderMode::kComposite;
  throw Error(ErrorCode::kInvalidArgument, "unknown render mode '" + std::string(name) + "'");
}

const Image& FileAssetResolver::resolve(const std::string& ref) const {
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(ref); it != cache_.end()) return it->second;
  const auto path = root_ / ref;
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kMissingAsset, "asset not found: " + ref);
  try {
    return cache_.emplace(ref, read_png(path)).first->second;
  } catch (const Error& e) {
    throw Error(ErrorCode::kMissingAsset, "asset not decodable: " + ref + " (" + e.what() + ")");
  }
}

std::pair<int, int> render_size(const Canvas& canvas, int long_side) {
  if (!canvas.valid()) throw Error(ErrorCode::kInvalidCanvas, "canvas must have positive size");
  if (canvas.width >= canvas.height) {
    const auto rows = std::max<long long>(1, std::llround(long_side * canvas.height / canvas.width));
    return {long_side, static_cast<int>(rows)};
  }
  const auto cols = std::max<long long>(1, std::llround(long_side * canvas.width / canvas.height));
  return {static_cast<int>(cols), long_side};
}

Image render(const Layout& layout, const RenderStyle& style, const AssetResolver* assets) {
  check_style(style);
  const auto [cols, rows] = render_size(layout.canvas, style.target_long_side);
  Image img(cols, rows, style.background_color);
  for (const auto& p : layout.placements) {
    const PixelRect r = to_pixels(p.box, layout.canvas, cols, rows);
    const Rgba color = style.color_of(p.element.kind);
    if (style.mode == RenderMode::kBoxes) {
      fill(img, r, color);
      continue;
    }
    if (p.element.kind == ElementKind::kText) {
      fill(img, r, color);
      draw_placeholder_text(img, r, p.element.text.value_or(""));
    } else if (p.element.asset_ref) {
      if (assets == nullptr) {
        throw Error(ErrorCode::kMissingAsset, "no asset resolver for " + *p.element.asset_ref);
      }
      blit_scaled(img, r, assets->resolve(*p.element.asset_ref));
    } else {
      fill(img, r, color);
    }
  }
  return img;
}

Image render_boxes_on_background(const Layout& layout, const Image& background,
                                 const RenderStyle& style) {
  check_style(style);
  if (background.empty()) throw Error(ErrorCode::kInvalidArgument, "background image is empty");
  const auto [cols, rows] = render_size(layout.canvas, style.target_long_side);
  Image img = (background.width() == cols && background.height() == rows)
                  ? background
                  : resize_nearest(background, cols, rows);
  for (const auto& p : layout.placements) {
    if (!is_predicted(p.element)) continue;
    const PixelRect r = to_pixels(p.box, layout.canvas, cols, rows);
    if (r.empty()) continue;
    const Rgba solid = style.color_of(p.element.kind);
    Rgba translucent = solid;
    translucent.a = kBoxFillAlpha;
    const int bw = std::min({kBorderPx, r.width(), r.height()});
    const PixelRect inner{r.x0 + bw, r.y0 + bw, std::max(r.x0 + bw, r.x1 - bw),
                          std::max(r.y0 + bw, r.y1 - bw)};
    fill(img, inner, translucent);
    fill(img, {r.x0, r.y0, r.x1, r.y0 + bw}, solid);
    fill(img, {r.x0, r.y1 - bw, r.x1, r.y1}, solid);
    fill(img, {r.x0, r.y0 + bw, r.x0 + bw, r.y1 - bw}, solid);
    fill(img, {r.x1 - bw, r.y0 + bw, r.x1, r.y1 - bw}, solid);
  }
  return img;
}

}  // namespace layoutpref
