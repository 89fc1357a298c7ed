#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace layoutpref {

struct Rgba {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  std::uint8_t a = 255;

  bool operator==(const Rgba&) const = default;
};

/// 8-bit RGBA raster, row-major, 4 bytes per pixel.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgba fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  Rgba at(int x, int y) const;
  void set(int x, int y, Rgba c);
  /// Straight alpha "over" blend of c onto the pixel; result alpha is opaque
  /// when the destination is opaque.
  void blend(int x, int y, Rgba c);

  std::span<const std::uint8_t> bytes() const { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Nearest-neighbour resample.
Image resize_nearest(const Image& src, int width, int height);

/// Non-interlaced 8-bit RGBA PNG.
std::vector<std::uint8_t> encode_png(const Image& image);
/// Accepts any PNG libpng can read; output is always RGBA8.
Image decode_png(std::span<const std::uint8_t> data);

void write_png(const Image& image, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

}  // namespace layoutpref
