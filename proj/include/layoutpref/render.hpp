#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include "layoutpref/image.hpp"
#include "layoutpref/layout.hpp"

namespace layoutpref {

enum class RenderMode { kComposite, kBoxes };

RenderMode parse_render_mode(std::string_view name);

struct RenderStyle {
  RenderMode mode = RenderMode::kBoxes;
  int target_long_side = 512;
  // Indexed by ElementKind.
  std::array<Rgba, kNumElementKinds> palette = {
      Rgba{66, 133, 244, 255},   // image
      Rgba{255, 152, 0, 255},    // text
      Rgba{76, 175, 80, 255},    // shape
      Rgba{200, 200, 200, 255},  // background
  };
  Rgba background_color{255, 255, 255, 255};

  Rgba color_of(ElementKind kind) const { return palette[static_cast<std::size_t>(kind)]; }
};

/// Resolves asset references to decoded images. Implementations must be safe
/// to call from several threads.
class AssetResolver {
 public:
  virtual ~AssetResolver() = default;
  /// Throws Error(kMissingAsset) when the reference cannot be resolved.
  virtual const Image& resolve(const std::string& ref) const = 0;
};

/// Loads PNG assets relative to a root directory, memoizing decoded images.
class FileAssetResolver : public AssetResolver {
 public:
  explicit FileAssetResolver(std::filesystem::path root) : root_(std::move(root)) {}
  const Image& resolve(const std::string& ref) const override;

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, Image> cache_;
};

/// Output raster size: the long side equals long_side, the short side keeps
/// the canvas aspect ratio (rounded, at least 1).
std::pair<int, int> render_size(const Canvas& canvas, int long_side);

/// Deterministic rasterization. Elements are drawn in placement order. In
/// composite mode assets are scaled into their boxes and text elements become
/// placeholder bars carrying up to 20 characters of their text.
Image render(const Layout& layout, const RenderStyle& style, const AssetResolver* assets = nullptr);

/// Semi-transparent category-colored boxes with 2 px opaque borders over a
/// background rescaled to the layout's render size.
Image render_boxes_on_background(const Layout& layout, const Image& background,
                                 const RenderStyle& style = {});

}  // namespace layoutpref
