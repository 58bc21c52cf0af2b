#pragma once

#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dlo/color.hpp"
#include "dlo/geometry.hpp"
#include "dlo/kernels.hpp"
#include "dlo/slic.hpp"

namespace dlo {

// Joint HSV histogram with bins_per_channel^3 cells, laid out (h, s, v) with v fastest.
struct ColorHistogram {
  int bins_per_channel = 8;
  std::vector<double> bins;
  bool normalized = false;

  ColorHistogram() = default;
  explicit ColorHistogram(int bins_per_channel);

  std::size_t size() const { return bins.size(); }
  double mass() const;
};

// Uniform bin edges; values on the upper edge of a channel fall into its last bin.
int histogram_bin(const HsvPixel& hsv, int bins_per_channel);

// Intersection sum_i min(a_i, b_i) of two normalized histograms of the same shape.
double histogram_similarity(const ColorHistogram& a, const ColorHistogram& b);

struct GraphVertex {
  int id = 0;
  Point2 centroid;
  int area = 0;
  ColorHistogram histogram;
  Rgb mean_rgb;
};

struct NeighborhoodEntry {
  int vertex_id;
  int hop_order;
  friend bool operator==(const NeighborhoodEntry&, const NeighborhoodEntry&) = default;
};

// Undirected region adjacency graph with precomputed BFS shells up to `order` hops.
class RegionGraph {
 public:
  RegionGraph() = default;
  RegionGraph(std::vector<GraphVertex> vertices, std::span<const std::pair<int, int>> edges, int order,
              kernels::Backend backend = kernels::Backend::parallel);

  std::size_t vertex_count() const { return vertices_.size(); }
  const GraphVertex& vertex(int id) const;
  const std::vector<GraphVertex>& vertices() const { return vertices_; }
  const std::vector<int>& adjacent(int id) const;
  std::vector<std::pair<int, int>> edges() const;
  std::size_t edge_count() const;
  int order() const { return order_; }
  int histogram_bins() const;

  // Vertices within `max_order` hops of `id`, excluding `id` and `excluded`.
  // Hop counts are shortest paths in the full graph; excluded vertices are
  // still traversed. Sorted by hop, then id.
  std::vector<NeighborhoodEntry> neighborhood(int id, int max_order, std::span<const int> excluded = {}) const;

  const std::vector<bool>& seed_flags() const { return seed_flags_; }
  void set_seed_flags(std::span<const int> seed_vertices);

 private:
  void check(int id) const;

  std::vector<GraphVertex> vertices_;
  kernels::AdjacencyLists adjacency_;
  std::vector<std::vector<kernels::Hop>> shells_;
  std::vector<bool> seed_flags_;
  int order_ = 0;
};

RegionGraph build_graph(const Image& image, const SuperpixelMap& map, int histogram_bins = 8, int order = 3,
                        kernels::Backend backend = kernels::Backend::parallel);

nlohmann::json graph_to_json(const RegionGraph& graph);
RegionGraph graph_from_json(const nlohmann::json& doc);

}  // namespace dlo
