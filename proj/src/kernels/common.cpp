#include <algorithm>

#include "dlo/kernels.hpp"
#include "kernel_detail.hpp"

namespace dlo::kernels {

LabelIndex build_label_index(std::span<const std::int32_t> labels, std::size_t regions) {
  LabelIndex index;
  index.offsets.assign(regions + 1, 0);
  for (std::int32_t l : labels) ++index.offsets[static_cast<std::size_t>(l) + 1];
  for (std::size_t r = 0; r < regions; ++r) index.offsets[r + 1] += index.offsets[r];
  index.pixels.resize(labels.size());
  std::vector<std::size_t> cursor(index.offsets.begin(), index.offsets.end() - 1);
  for (std::size_t i = 0; i < labels.size(); ++i) index.pixels[cursor[labels[i]]++] = i;
  return index;
}

namespace detail {

std::vector<Hop> bfs_shell(const AdjacencyLists& adjacency, int source, int order, std::vector<int>& depth) {
  std::vector<Hop> shell;
  std::vector<int> frontier{source};
  depth[source] = 0;
  std::vector<int> touched{source};
  for (int hop = 1; hop <= order && !frontier.empty(); ++hop) {
    std::vector<int> next;
    for (int v : frontier) {
      for (int w : adjacency[v]) {
        if (depth[w] >= 0) continue;
        depth[w] = hop;
        touched.push_back(w);
        next.push_back(w);
      }
    }
    std::sort(next.begin(), next.end());
    for (int w : next) shell.push_back({w, hop});
    frontier = std::move(next);
  }
  for (int v : touched) depth[v] = -1;
  return shell;
}

SegmentBox segment_box(Point2 a, Point2 b, double radius, int width, int height) {
  SegmentBox box;
  box.x0 = std::max(0, static_cast<int>(std::ceil(std::min(a.x, b.x) - radius)));
  box.x1 = std::min(width - 1, static_cast<int>(std::floor(std::max(a.x, b.x) + radius)));
  box.y0 = std::max(0, static_cast<int>(std::ceil(std::min(a.y, b.y) - radius)));
  box.y1 = std::min(height - 1, static_cast<int>(std::floor(std::max(a.y, b.y) + radius)));
  return box;
}

}  // namespace detail
}  // namespace dlo::kernels
