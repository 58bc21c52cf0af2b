#include <limits>

#include "dlo/kernels.hpp"
#include "kernel_detail.hpp"

namespace dlo::kernels::parallel {

void slic_assign(const LabPlanes& lab, std::span<const SlicCenter> centers, double spatial_scale,
                 double radius, std::span<std::int32_t> labels, std::span<double> dist) {
  // Centers covering each row, in ascending id order.
  std::vector<std::vector<std::int32_t>> row_centers(static_cast<std::size_t>(lab.height));
  std::vector<Window> windows(centers.size());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    windows[k] = search_window(centers[k], radius, lab.width, lab.height);
    for (int y = windows[k].y0; y <= windows[k].y1; ++y) row_centers[y].push_back(static_cast<std::int32_t>(k));
  }

#pragma omp parallel for schedule(dynamic, 4)
  for (int y = 0; y < lab.height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * lab.width;
    std::fill(labels.begin() + row, labels.begin() + row + lab.width, -1);
    std::fill(dist.begin() + row, dist.begin() + row + lab.width, std::numeric_limits<double>::infinity());
    for (std::int32_t k : row_centers[y]) {
      const SlicCenter& c = centers[k];
      for (int x = windows[k].x0; x <= windows[k].x1; ++x) {
        const std::size_t i = row + x;
        const double d = slic_distance2(lab, i, x, y, c, spatial_scale);
        if (d < dist[i]) {
          dist[i] = d;
          labels[i] = k;
        }
      }
    }
  }
}

std::vector<SlicCenter> slic_update(const LabPlanes& lab, std::span<const std::int32_t> labels,
                                    std::span<const SlicCenter> centers, double radius) {
  std::vector<SlicCenter> out(centers.begin(), centers.end());
  const auto count = static_cast<std::ptrdiff_t>(centers.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const Window w = search_window(centers[k], radius, lab.width, lab.height);
    SlicCenter s;
    std::int64_t n = 0;
    for (int y = w.y0; y <= w.y1; ++y) {
      for (int x = w.x0; x <= w.x1; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * lab.width + x;
        if (labels[i] != k) continue;
        s.l += lab.l[i];
        s.a += lab.a[i];
        s.b += lab.b[i];
        s.x += x;
        s.y += y;
        ++n;
      }
    }
    if (n == 0) continue;
    const double dn = static_cast<double>(n);
    out[k] = {s.l / dn, s.a / dn, s.b / dn, s.x / dn, s.y / dn};
  }
  return out;
}

RegionSums region_sums(const Image& image, const LabPlanes& lab, std::span<const std::int32_t> labels,
                       std::size_t regions) {
  const LabelIndex index = build_label_index(labels, regions);
  RegionSums s(regions);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(regions); ++r) {
    for (std::size_t j = index.offsets[r]; j < index.offsets[r + 1]; ++j) {
      const std::size_t i = index.pixels[j];
      const Rgb c = image.at(i);
      ++s.area[r];
      s.sum_x[r] += static_cast<std::int64_t>(i % lab.width);
      s.sum_y[r] += static_cast<std::int64_t>(i / lab.width);
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
  const LabelIndex index = build_label_index(labels, regions);
  std::vector<std::uint32_t> counts(regions * bins, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(regions); ++r) {
    std::uint32_t* row = counts.data() + static_cast<std::size_t>(r) * bins;
    for (std::size_t j = index.offsets[r]; j < index.offsets[r + 1]; ++j) ++row[pixel_bins[index.pixels[j]]];
  }
  return counts;
}

std::vector<std::vector<Hop>> neighborhoods(const AdjacencyLists& adjacency, int order) {
  std::vector<std::vector<Hop>> out(adjacency.size());
#pragma omp parallel
  {
    std::vector<int> depth(adjacency.size(), -1);
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(adjacency.size()); ++v) {
      out[v] = detail::bfs_shell(adjacency, static_cast<int>(v), order, depth);
    }
  }
  return out;
}

void stroke_polyline(std::span<const Point2> polyline, double radius, Mask& mask) {
  const std::size_t segments = detail::segment_count(polyline.size());
  std::vector<detail::SegmentBox> boxes(segments);
  for (std::size_t s = 0; s < segments; ++s) {
    boxes[s] = detail::segment_box(polyline[s], detail::segment_end(polyline, s), radius, mask.width(),
                                   mask.height());
  }
#pragma omp parallel for schedule(dynamic, 8)
  for (int y = 0; y < mask.height(); ++y) {
    for (std::size_t s = 0; s < segments; ++s) {
      const detail::SegmentBox& box = boxes[s];
      if (y < box.y0 || y > box.y1) continue;
      const Point2 a = polyline[s];
      const Point2 b = detail::segment_end(polyline, s);
      for (int x = box.x0; x <= box.x1; ++x) {
        if (mask(x, y)) continue;
        if (point_segment_distance({static_cast<double>(x), static_cast<double>(y)}, a, b) <= radius) {
          mask(x, y) = 1;
        }
      }
    }
  }
}

}  // namespace dlo::kernels::parallel
