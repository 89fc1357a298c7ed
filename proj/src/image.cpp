#include "layoutpref/image.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "layoutpref/error.hpp"

namespace layoutpref {

Image::Image(int width, int height, Rgba fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error(ErrorCode::kInvalidArgument, "negative image size");
  pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 4);
  for (std::size_t i = 0; i < pixels_.size(); i += 4) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
    pixels_[i + 3] = fill.a;
  }
}

Rgba Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 4;
  return {pixels_[i], pixels_[i + 1], pixels_[i + 2], pixels_[i + 3]};
}

void Image::set(int x, int y, Rgba c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 4;
  pixels_[i] = c.r;
  pixels_[i + 1] = c.g;
  pixels_[i + 2] = c.b;
  pixels_[i + 3] = c.a;
}

void Image::blend(int x, int y, Rgba c) {
  if (c.a == 255) {
    set(x, y, c);
    return;
  }
  if (c.a == 0) return;
  const Rgba d = at(x, y);
  // Integer arithmetic keeps blending bit-exact across compilers.
  const auto mix = [&](std::uint8_t s, std::uint8_t t) {
    return static_cast<std::uint8_t>((s * c.a + t * (255 - c.a) + 127) / 255);
  };
  const auto out_a = static_cast<std::uint8_t>(c.a + (d.a * (255 - c.a) + 127) / 255);
  set(x, y, {mix(c.r, d.r), mix(c.g, d.g), mix(c.b, d.b), out_a});
}

Image resize_nearest(const Image& src, int width, int height) {
  Image out(width, height);
  if (src.empty()) return out;
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>((static_cast<long long>(y) * src.height()) / height);
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>((static_cast<long long>(x) * src.width()) / width);
      out.set(x, y, src.at(sx, sy));
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot encode an empty image");
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(image.width());
  desc.height = static_cast<png_uint_32>(image.height());
  desc.format = PNG_FORMAT_RGBA;
  png_alloc_size_t size = 0;
  const auto bytes = image.bytes();
  if (!png_image_write_to_memory(&desc, nullptr, &size, 0, bytes.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("png encode: ") + desc.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, bytes.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("png encode: ") + desc.message);
  }
  out.resize(size);
  return out;
}

Image decode_png(std::span<const std::uint8_t> data) {
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&desc, data.data(), data.size())) {
    throw Error(ErrorCode::kIoError, std::string("png decode: ") + desc.message);
  }
  desc.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(desc));
  if (!png_image_finish_read(&desc, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&desc);
    throw Error(ErrorCode::kIoError, std::string("png decode: ") + desc.message);
  }
  const int width = static_cast<int>(desc.width);
  const int height = static_cast<int>(desc.height);
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::uint8_t* p = buffer.data() + (static_cast<std::size_t>(y) * width + x) * 4;
      out.set(x, y, {p[0], p[1], p[2], p[3]});
    }
  }
  return out;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

}  // namespace layoutpref
