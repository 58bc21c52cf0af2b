#include "dlo/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <json.hpp>

namespace dlo {
namespace {

constexpr double kMassTolerance = 1e-9;

int channel_bin(double value, double upper, int bins) {
  const int b = static_cast<int>(std::floor(value / upper * bins));
  return std::clamp(b, 0, bins - 1);
}

}  // namespace

ColorHistogram::ColorHistogram(int bins_per_channel)
    : bins_per_channel(bins_per_channel),
      bins(static_cast<std::size_t>(bins_per_channel) * bins_per_channel * bins_per_channel, 0.0) {
  require(bins_per_channel >= 2, "histogram needs at least 2 bins per channel");
}

double ColorHistogram::mass() const { return std::accumulate(bins.begin(), bins.end(), 0.0); }

int histogram_bin(const HsvPixel& hsv, int bins_per_channel) {
  const int h = channel_bin(hsv.h, 360.0, bins_per_channel);
  const int s = channel_bin(hsv.s, 1.0, bins_per_channel);
  const int v = channel_bin(hsv.v, 1.0, bins_per_channel);
  return (h * bins_per_channel + s) * bins_per_channel + v;
}

double histogram_similarity(const ColorHistogram& a, const ColorHistogram& b) {
  require(a.bins_per_channel == b.bins_per_channel && a.bins.size() == b.bins.size(),
          "histogram shapes differ");
  require(a.normalized && b.normalized, "histograms must be normalized");
  require(std::abs(a.mass() - 1.0) <= kMassTolerance && std::abs(b.mass() - 1.0) <= kMassTolerance,
          "normalized histogram mass is not 1");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.bins.size(); ++i) sum += std::min(a.bins[i], b.bins[i]);
  return std::clamp(sum, 0.0, 1.0);
}

RegionGraph::RegionGraph(std::vector<GraphVertex> vertices, std::span<const std::pair<int, int>> edges,
                         int order, kernels::Backend backend)
    : vertices_(std::move(vertices)), order_(order) {
  require(order >= 1, "graph order must be at least 1");
  const int n = static_cast<int>(vertices_.size());
  for (int i = 0; i < n; ++i) require(vertices_[i].id == i, "vertex ids must be 0..n-1 in order");
  adjacency_.assign(vertices_.size(), {});
  for (const auto& [a, b] : edges) {
    require(a >= 0 && b >= 0 && a < n && b < n, "edge references an unknown vertex");
    require(a != b, "self-loops are not allowed");
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  shells_ = backend == kernels::Backend::serial ? kernels::serial::neighborhoods(adjacency_, order_)
                                                : kernels::parallel::neighborhoods(adjacency_, order_);
  seed_flags_.assign(vertices_.size(), false);
}

void RegionGraph::check(int id) const {
  if (id < 0 || id >= static_cast<int>(vertices_.size())) {
    fail(ErrorCode::invalid_argument, "unknown vertex id " + std::to_string(id));
  }
}

const GraphVertex& RegionGraph::vertex(int id) const {
  check(id);
  return vertices_[id];
}

const std::vector<int>& RegionGraph::adjacent(int id) const {
  check(id);
  return adjacency_[id];
}

std::vector<std::pair<int, int>> RegionGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t a = 0; a < adjacency_.size(); ++a) {
    for (int b : adjacency_[a]) {
      if (static_cast<int>(a) < b) out.emplace_back(static_cast<int>(a), b);
    }
  }
  return out;
}

std::size_t RegionGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& list : adjacency_) total += list.size();
  return total / 2;
}

int RegionGraph::histogram_bins() const {
  return vertices_.empty() ? 0 : vertices_.front().histogram.bins_per_channel;
}

std::vector<NeighborhoodEntry> RegionGraph::neighborhood(int id, int max_order, std::span<const int> excluded) const {
  check(id);
  require(max_order >= 1 && max_order <= order_,
          "neighborhood order " + std::to_string(max_order) + " outside [1, " + std::to_string(order_) + "]");
  std::vector<NeighborhoodEntry> out;
  for (const kernels::Hop& h : shells_[id]) {
    if (h.hop > max_order) break;
    if (std::find(excluded.begin(), excluded.end(), h.vertex) != excluded.end()) continue;
    out.push_back({h.vertex, h.hop});
  }
  return out;
}

void RegionGraph::set_seed_flags(std::span<const int> seed_vertices) {
  seed_flags_.assign(vertices_.size(), false);
  for (int v : seed_vertices) {
    check(v);
    seed_flags_[v] = true;
  }
}

RegionGraph build_graph(const Image& image, const SuperpixelMap& map, int histogram_bins, int order,
                        kernels::Backend backend) {
  require(histogram_bins >= 2, "histogram needs at least 2 bins per channel");
  require(order >= 1, "graph order must be at least 1");
  require(image.width() == map.width() && image.height() == map.height(), "image and label field differ in size");

  const std::size_t n = image.pixel_count();
  std::vector<std::uint16_t> pixel_bins(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    pixel_bins[i] = static_cast<std::uint16_t>(histogram_bin(rgb_to_hsv(image.at(static_cast<std::size_t>(i))), histogram_bins));
  }
  const std::size_t cells = static_cast<std::size_t>(histogram_bins) * histogram_bins * histogram_bins;
  const std::vector<std::uint32_t> counts =
      backend == kernels::Backend::serial
          ? kernels::serial::histogram_counts(map.labels.values(), pixel_bins, map.region_count(), cells)
          : kernels::parallel::histogram_counts(map.labels.values(), pixel_bins, map.region_count(), cells);

  std::vector<GraphVertex> vertices(map.region_count());
  for (std::size_t r = 0; r < map.region_count(); ++r) {
    const RegionStats& stats = map.regions[r];
    GraphVertex& v = vertices[r];
    v.id = static_cast<int>(r);
    v.centroid = stats.centroid;
    v.area = stats.area;
    v.mean_rgb = stats.mean_rgb;
    v.histogram = ColorHistogram(histogram_bins);
    for (std::size_t c = 0; c < cells; ++c) {
      v.histogram.bins[c] = static_cast<double>(counts[r * cells + c]) / stats.area;
    }
    v.histogram.normalized = true;
  }
  const auto pairs = region_adjacency_pairs(map);
  return RegionGraph(std::move(vertices), pairs, order, backend);
}

nlohmann::json graph_to_json(const RegionGraph& graph) {
  nlohmann::json vertices = nlohmann::json::array();
  for (const GraphVertex& v : graph.vertices()) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < v.histogram.bins.size(); ++i) {
      if (v.histogram.bins[i] != 0.0) entries.push_back({i, v.histogram.bins[i]});
    }
    vertices.push_back({{"id", v.id},
                        {"centroid", {v.centroid.x, v.centroid.y}},
                        {"area", v.area},
                        {"mean_rgb", {v.mean_rgb.r, v.mean_rgb.g, v.mean_rgb.b}},
                        {"seed", static_cast<bool>(graph.seed_flags()[v.id])},
                        {"histogram", entries}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : graph.edges()) edges.push_back({a, b});
  return {{"version", 1},
          {"order", graph.order()},
          {"histogram_bins", graph.histogram_bins()},
          {"vertices", std::move(vertices)},
          {"edges", std::move(edges)}};
}

RegionGraph graph_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != 1) fail(ErrorCode::invalid_argument, "unsupported graph version");
    const int bins = doc.at("histogram_bins").get<int>();
    std::vector<GraphVertex> vertices;
    std::vector<int> seeds;
    for (const auto& jv : doc.at("vertices")) {
      GraphVertex v;
      v.id = jv.at("id").get<int>();
      v.centroid = {jv.at("centroid").at(0).get<double>(), jv.at("centroid").at(1).get<double>()};
      v.area = jv.at("area").get<int>();
      const auto& rgb = jv.at("mean_rgb");
      v.mean_rgb = {rgb.at(0).get<std::uint8_t>(), rgb.at(1).get<std::uint8_t>(), rgb.at(2).get<std::uint8_t>()};
      v.histogram = ColorHistogram(bins);
      for (const auto& e : jv.at("histogram")) {
        const auto index = e.at(0).get<std::size_t>();
        require(index < v.histogram.bins.size(), "histogram bin index out of range");
        v.histogram.bins[index] = e.at(1).get<double>();
      }
      v.histogram.normalized = true;
      if (jv.value("seed", false)) seeds.push_back(v.id);
      vertices.push_back(std::move(v));
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : doc.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    RegionGraph graph(std::move(vertices), edges, doc.at("order").get<int>());
    graph.set_seed_flags(seeds);
    return graph;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("malformed graph document: ") + e.what());
  }
}

}  // namespace dlo
