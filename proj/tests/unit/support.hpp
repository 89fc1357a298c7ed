#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "layoutpref/dataio.hpp"
#include "layoutpref/layout.hpp"

namespace testing {

// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("layoutpref-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline layoutpref::Element shape(std::string id) {
  layoutpref::Element e;
  e.id = std::move(id);
  e.kind = layoutpref::ElementKind::kShape;
  return e;
}

inline layoutpref::Element text(std::string id, std::string body) {
  layoutpref::Element e;
  e.id = std::move(id);
  e.kind = layoutpref::ElementKind::kText;
  e.text = std::move(body);
  return e;
}

inline layoutpref::Element image(std::string id) {
  layoutpref::Element e;
  e.id = std::move(id);
  e.kind = layoutpref::ElementKind::kImage;
  return e;
}

inline layoutpref::Placement place(layoutpref::Element e, double x, double y, double w, double h) {
  return {std::move(e), {x, y, w, h}};
}

// Area shared by two boxes, counted on a raster of `cells` cells per unit.
// Exact when every box edge falls on the raster.
inline double raster_intersection(const layoutpref::BBox& a, const layoutpref::BBox& b,
                                  int cells = 64) {
  const double lo_x = std::min(a.left(), b.left()), hi_x = std::max(a.right(), b.right());
  const double lo_y = std::min(a.top(), b.top()), hi_y = std::max(a.bottom(), b.bottom());
  const double step = 1.0 / cells;
  auto inside = [](const layoutpref::BBox& r, double px, double py) {
    return px > r.left() && px < r.right() && py > r.top() && py < r.bottom();
  };
  long count = 0;
  for (double py = lo_y + step / 2; py < hi_y; py += step) {
    for (double px = lo_x + step / 2; px < hi_x; px += step) {
      if (inside(a, px, py) && inside(b, px, py)) ++count;
    }
  }
  return static_cast<double>(count) * step * step;
}

// Sample whose ground truth is the given placements.
inline layoutpref::DatasetSample sample_of(std::string id, const layoutpref::Layout& layout) {
  layoutpref::DatasetSample s;
  s.id = std::move(id);
  s.canvas = layout.canvas;
  for (const auto& p : layout.placements) s.elements.push_back({p.element, p.box});
  return s;
}

}  // namespace testing
