#pragma once

#include <vector>

#include "dlo/kernels.hpp"

namespace dlo::kernels::detail {

// `depth` must be sized to the vertex count and filled with -1; it is restored on return.
std::vector<Hop> bfs_shell(const AdjacencyLists& adjacency, int source, int order, std::vector<int>& depth);

struct SegmentBox {
  int x0, x1, y0, y1;
};
SegmentBox segment_box(Point2 a, Point2 b, double radius, int width, int height);

// A single-point polyline strokes a disc.
inline std::size_t segment_count(std::size_t points) { return points <= 1 ? points : points - 1; }
inline Point2 segment_end(std::span<const Point2> polyline, std::size_t s) {
  return polyline.size() == 1 ? polyline[0] : polyline[s + 1];
}

}  // namespace dlo::kernels::detail
