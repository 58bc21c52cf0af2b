#pragma once

// Data-parallel inner loops of the pipeline. Every kernel has a serial
// reference in `serial::` and an OpenMP version in `parallel::` with the
// same signature. Both produce bit-identical results: floating-point sums
// are accumulated in the same (row-major) order and ties resolve the same way.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dlo/color.hpp"
#include "dlo/geometry.hpp"
#include "dlo/image.hpp"

namespace dlo::kernels {

struct SlicCenter {
  double l = 0.0, a = 0.0, b = 0.0;
  double x = 0.0, y = 0.0;

  friend bool operator==(const SlicCenter&, const SlicCenter&) = default;
};

// Inclusive pixel window [x0, x1] x [y0, y1] of pixels within `radius` of the
// center along each axis, clipped to the image.
struct Window {
  int x0, x1, y0, y1;
};

inline Window search_window(const SlicCenter& c, double radius, int width, int height) {
  Window w;
  w.x0 = std::max(0, static_cast<int>(std::ceil(c.x - radius)));
  w.x1 = std::min(width - 1, static_cast<int>(std::floor(c.x + radius)));
  w.y0 = std::max(0, static_cast<int>(std::ceil(c.y - radius)));
  w.y1 = std::min(height - 1, static_cast<int>(std::floor(c.y + radius)));
  return w;
}

// Squared SLIC distance d_lab^2 + spatial_scale * d_xy^2.
inline double slic_distance2(const LabPlanes& lab, std::size_t i, int x, int y, const SlicCenter& c,
                             double spatial_scale) {
  const double dl = lab.l[i] - c.l;
  const double da = lab.a[i] - c.a;
  const double db = lab.b[i] - c.b;
  const double dx = x - c.x;
  const double dy = y - c.y;
  return dl * dl + da * da + db * db + spatial_scale * (dx * dx + dy * dy);
}

struct RegionSums {
  std::vector<std::int64_t> area;
  std::vector<std::int64_t> sum_x, sum_y;
  std::vector<double> sum_l, sum_a, sum_b;
  std::vector<std::int64_t> sum_r, sum_g, sum_bl;

  explicit RegionSums(std::size_t regions = 0)
      : area(regions), sum_x(regions), sum_y(regions), sum_l(regions), sum_a(regions), sum_b(regions),
        sum_r(regions), sum_g(regions), sum_bl(regions) {}

  friend bool operator==(const RegionSums&, const RegionSums&) = default;
};

// Pixel indices grouped by label, ascending within each group.
struct LabelIndex {
  std::vector<std::size_t> offsets;  // size regions + 1
  std::vector<std::size_t> pixels;
};

LabelIndex build_label_index(std::span<const std::int32_t> labels, std::size_t regions);

// Order-limited BFS shells per vertex: (vertex, hop) sorted by hop, then id.
struct Hop {
  int vertex;
  int hop;
  friend bool operator==(const Hop&, const Hop&) = default;
};
using AdjacencyLists = std::vector<std::vector<int>>;

namespace serial {

// Classic center-major SLIC assignment. `labels`/`dist` are overwritten.
void slic_assign(const LabPlanes& lab, std::span<const SlicCenter> centers, double spatial_scale,
                 double radius, std::span<std::int32_t> labels, std::span<double> dist);
std::vector<SlicCenter> slic_update(const LabPlanes& lab, std::span<const std::int32_t> labels,
                                    std::span<const SlicCenter> centers, double radius);
RegionSums region_sums(const Image& image, const LabPlanes& lab, std::span<const std::int32_t> labels,
                       std::size_t regions);
// counts[region * bins + bin]
std::vector<std::uint32_t> histogram_counts(std::span<const std::int32_t> labels,
                                            std::span<const std::uint16_t> pixel_bins, std::size_t regions,
                                            std::size_t bins);
std::vector<std::vector<Hop>> neighborhoods(const AdjacencyLists& adjacency, int order);
// Sets every pixel whose center lies within `radius` of the polyline.
void stroke_polyline(std::span<const Point2> polyline, double radius, Mask& mask);

}  // namespace serial

namespace parallel {

// Row-parallel assignment: each row visits its covering centers in id order.
void slic_assign(const LabPlanes& lab, std::span<const SlicCenter> centers, double spatial_scale,
                 double radius, std::span<std::int32_t> labels, std::span<double> dist);
// Center-parallel update: each center rescans its own search window.
std::vector<SlicCenter> slic_update(const LabPlanes& lab, std::span<const std::int32_t> labels,
                                    std::span<const SlicCenter> centers, double radius);
RegionSums region_sums(const Image& image, const LabPlanes& lab, std::span<const std::int32_t> labels,
                       std::size_t regions);
std::vector<std::uint32_t> histogram_counts(std::span<const std::int32_t> labels,
                                            std::span<const std::uint16_t> pixel_bins, std::size_t regions,
                                            std::size_t bins);
std::vector<std::vector<Hop>> neighborhoods(const AdjacencyLists& adjacency, int order);
void stroke_polyline(std::span<const Point2> polyline, double radius, Mask& mask);

}  // namespace parallel

enum class Backend { serial, parallel };

}  // namespace dlo::kernels
