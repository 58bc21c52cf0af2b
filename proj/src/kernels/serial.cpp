#include <limits>

#include "dlo/kernels.hpp"
#include "kernel_detail.hpp"

namespace dlo::kernels::serial {

void slic_assign(const LabPlanes& lab, std::span<const SlicCenter> centers, double spatial_scale,
                 double radius, std::span<std::int32_t> labels, std::span<double> dist) {
  std::fill(labels.begin(), labels.end(), -1);
  std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const SlicCenter& c = centers[k];
    const Window w = search_window(c, radius, lab.width, lab.height);
    for (int y = w.y0; y <= w.y1; ++y) {
      for (int x = w.x0; x <= w.x1; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * lab.width + x;
        const double d = slic_distance2(lab, i, x, y, c, spatial_scale);
        if (d < dist[i]) {
          dist[i] = d;
          labels[i] = static_cast<std::int32_t>(k);
        }
      }
    }
  }
}

std::vector<SlicCenter> slic_update(const LabPlanes& lab, std::span<const std::int32_t> labels,
                                    std::span<const SlicCenter> centers, double /*radius*/) {
  const std::size_t k = centers.size();
  std::vector<SlicCenter> sums(k);
  std::vector<std::int64_t> counts(k, 0);
  for (int y = 0; y < lab.height; ++y) {
    for (int x = 0; x < lab.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * lab.width + x;
      const std::int32_t label = labels[i];
      if (label < 0) continue;
      SlicCenter& s = sums[label];
      s.l += lab.l[i];
      s.a += lab.a[i];
      s.b += lab.b[i];
      s.x += x;
      s.y += y;
      ++counts[label];
    }
  }
  std::vector<SlicCenter> out(centers.begin(), centers.end());
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    const double n = static_cast<double>(counts[c]);
    out[c] = {sums[c].l / n, sums[c].a / n, sums[c].b / n, sums[c].x / n, sums[c].y / n};
  }
  return out;
}

RegionSums region_sums(const Image& image, const LabPlanes& lab, std::span<const std::int32_t> labels,
                       std::size_t regions) {
  RegionSums s(regions);
  for (int y = 0; y < lab.height; ++y) {
    for (int x = 0; x < lab.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * lab.width + x;
      const auto r = static_cast<std::size_t>(labels[i]);
      const Rgb c = image.at(i);
      ++s.area[r];
      s.sum_x[r] += x;
      s.sum_y[r] += y;
      s.sum_l[r] += lab.l[i];
      s.sum_a[r] += lab.a[i];
      s.sum_b[r] += lab.b[i];
      s.sum_r[r] += c.r;
      s.sum_g[r] += c.g;
      s.sum_bl[r] += c.b;
    }
  }
  return s;
}

std::vector<std::uint32_t> histogram_counts(std::span<const std::int32_t> labels,
                                            std::span<const std::uint16_t> pixel_bins, std::size_t regions,
                                            std::size_t bins) {
  std::vector<std::uint32_t> counts(regions * bins, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++counts[static_cast<std::size_t>(labels[i]) * bins + pixel_bins[i]];
  }
  return counts;
}

std::vector<std::vector<Hop>> neighborhoods(const AdjacencyLists& adjacency, int order) {
  std::vector<std::vector<Hop>> out(adjacency.size());
  std::vector<int> depth(adjacency.size(), -1);
  for (std::size_t v = 0; v < adjacency.size(); ++v) {
    out[v] = detail::bfs_shell(adjacency, static_cast<int>(v), order, depth);
  }
  return out;
}

void stroke_polyline(std::span<const Point2> polyline, double radius, Mask& mask) {
  const std::size_t segments = detail::segment_count(polyline.size());
  for (std::size_t s = 0; s < segments; ++s) {
    const Point2 a = polyline[s];
    const Point2 b = detail::segment_end(polyline, s);
    const detail::SegmentBox box = detail::segment_box(a, b, radius, mask.width(), mask.height());
    for (int y = box.y0; y <= box.y1; ++y) {
      for (int x = box.x0; x <= box.x1; ++x) {
        if (point_segment_distance({static_cast<double>(x), static_cast<double>(y)}, a, b) <= radius) {
          mask(x, y) = 1;
        }
      }
    }
  }
}

}  // namespace dlo::kernels::serial
