#include <algorithm>
#include <queue>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "dlo/color.hpp"
#include "dlo/graph.hpp"
#include "support.hpp"

namespace dlo {
namespace {

SuperpixelMap map_from(const Image& img, LabelField labels) { return make_superpixel_map(img, std::move(labels), 8.0); }

RegionGraph path_graph(int n, int order) {
  std::vector<GraphVertex> vs;
  std::vector<std::pair<int, int>> es;
  for (int i = 0; i < n; ++i) vs.push_back(test::vertex(i, {10.0 * i, 0.0}, test::spike(0)));
  for (int i = 1; i < n; ++i) es.push_back({i - 1, i});
  return RegionGraph(std::move(vs), es, order);
}

TEST(Histogram, BinEdges) {
  EXPECT_EQ(histogram_bin({0.0, 0.0, 0.0}, 8), 0);
  // Upper edges fall into the last bin of each channel.
  EXPECT_EQ(histogram_bin({359.999, 1.0, 1.0}, 8), 7 * 64 + 7 * 8 + 7);
  EXPECT_EQ(histogram_bin({45.0, 0.125, 0.0}, 8), 1 * 64 + 1 * 8);
  EXPECT_EQ(histogram_bin({44.999, 0.1249, 0.999}, 8), 0 * 64 + 0 * 8 + 7);
}

TEST(Histogram, SimilarityExamples) {
  const ColorHistogram h = test::spike(3);
  EXPECT_EQ(histogram_similarity(h, h), 1.0);
  EXPECT_EQ(histogram_similarity(test::spike(0), test::spike(1)), 0.0);
  ColorHistogram a(2), b(2);
  a.bins[0] = 0.5, a.bins[1] = 0.5;
  b.bins[0] = 0.25, b.bins[1] = 0.75;
  a.normalized = b.normalized = true;
  EXPECT_NEAR(histogram_similarity(a, b), 0.75, 1e-15);
  EXPECT_EQ(histogram_similarity(a, b), histogram_similarity(b, a));
}

TEST(Histogram, SimilarityRejectsMismatchedShapes) {
  EXPECT_THROW(histogram_similarity(test::spike(0, 2), test::spike(0, 3)), Error);
  ColorHistogram raw(2);
  raw.bins[0] = 3.0;
  EXPECT_THROW(histogram_similarity(raw, raw), Error);
}

TEST(Graph, HalfSplit) {
  const Image img(10, 6, Rgb{9, 9, 9});
  const RegionGraph g = build_graph(img, map_from(img, test::label_field(10, 6, [](int x, int) { return x < 5 ? 0 : 1; })));
  EXPECT_EQ(g.vertex_count(), 2u);
  EXPECT_EQ(g.edge_count(), 1u);
}

TEST(Graph, TwoByTwoGrid) {
  const Image img(8, 8, Rgb{9, 9, 9});
  const RegionGraph g = build_graph(
      img, map_from(img, test::label_field(8, 8, [](int x, int y) { return (y < 4 ? 0 : 2) + (x < 4 ? 0 : 1); })));
  EXPECT_EQ(g.vertex_count(), 4u);
  EXPECT_EQ(g.edge_count(), 4u);
}

TEST(Graph, UniformImageHasSpikeHistograms) {
  const Image img(64, 64, Rgb{40, 160, 90});
  SlicParams p;
  p.region_count = 16;
  const RegionGraph g = build_graph(img, slic_segment(img, p));
  const int bin = histogram_bin(rgb_to_hsv({40, 160, 90}), 8);
  for (const GraphVertex& v : g.vertices()) {
    for (int i = 0; i < static_cast<int>(v.histogram.size()); ++i) EXPECT_EQ(v.histogram.bins[i], i == bin ? 1.0 : 0.0);
  }
}

TEST(Graph, HistogramMassMatchesPixelScan) {
  const Image img = test::textured_image(48, 40, 4);
  SlicParams p;
  p.region_count = 12;
  const SuperpixelMap map = slic_segment(img, p);
  for (int bins : {2, 5, 8}) {
    const RegionGraph g = build_graph(img, map, bins, 2);
    for (const GraphVertex& v : g.vertices()) {
      std::vector<int> counts(static_cast<std::size_t>(bins) * bins * bins, 0);
      int area = 0;
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          if (map.labels(x, y) != v.id) continue;
          ++counts[histogram_bin(rgb_to_hsv(img.at(x, y)), bins)];
          ++area;
        }
      }
      EXPECT_NEAR(v.histogram.mass(), 1.0, 1e-9);
      for (std::size_t i = 0; i < counts.size(); ++i) EXPECT_NEAR(v.histogram.bins[i], double(counts[i]) / area, 1e-12);
    }
  }
}

TEST(Graph, SimilarityBounds) {
  const Image img = test::textured_image(48, 40, 8);
  SlicParams p;
  p.region_count = 20;
  const RegionGraph g = build_graph(img, slic_segment(img, p));
  for (const GraphVertex& a : g.vertices()) {
    for (const GraphVertex& b : g.vertices()) {
      const double s = histogram_similarity(a.histogram, b.histogram);
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, histogram_similarity(a.histogram, a.histogram) + 1e-12);
      EXPECT_EQ(s, histogram_similarity(b.histogram, a.histogram));
    }
  }
}

TEST(Neighborhood, PathGraph) {
  const RegionGraph g = path_graph(4, 3);
  EXPECT_EQ(g.neighborhood(1, 1), (std::vector<NeighborhoodEntry>{{0, 1}, {2, 1}}));
  EXPECT_EQ(g.neighborhood(1, 2), (std::vector<NeighborhoodEntry>{{0, 1}, {2, 1}, {3, 2}}));
  const int excluded[] = {2};
  // Excluded vertices are dropped but still traversed.
  EXPECT_EQ(g.neighborhood(1, 2, excluded), (std::vector<NeighborhoodEntry>{{0, 1}, {3, 2}}));
}

TEST(Neighborhood, OrderAboveGraphOrderIsRejected) {
  const RegionGraph g = path_graph(4, 2);
  EXPECT_THROW(g.neighborhood(0, 3), Error);
}

// All-pairs BFS over an explicit adjacency list.
std::vector<std::vector<int>> hop_matrix(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) adj[a].push_back(b), adj[b].push_back(a);
  std::vector<std::vector<int>> hops(n, std::vector<int>(n, -1));
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    q.push(s);
    hops[s][s] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (hops[s][v] < 0) hops[s][v] = hops[s][u] + 1, q.push(v);
      }
    }
  }
  return hops;
}

TEST(Neighborhood, MatchesBruteForceBfs) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 25);
    std::vector<GraphVertex> vs;
    for (int i = 0; i < n; ++i) vs.push_back(test::vertex(i, {double(i), double(i % 3)}, test::spike(0)));
    std::set<std::pair<int, int>> es;
    for (int k = 0; k < 2 * n; ++k) {
      const int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
      if (a != b) es.insert(std::minmax(a, b));
    }
    const std::vector<std::pair<int, int>> edges(es.begin(), es.end());
    const auto hops = hop_matrix(n, edges);
    const RegionGraph g(vs, edges, 4);
    for (int q = 0; q < n; ++q) {
      for (int d = 1; d <= 4; ++d) {
        std::vector<NeighborhoodEntry> expected;
        for (int v = 0; v < n; ++v) {
          if (v != q && hops[q][v] > 0 && hops[q][v] <= d) expected.push_back({v, hops[q][v]});
        }
        std::sort(expected.begin(), expected.end(), [](auto a, auto b) {
          return a.hop_order != b.hop_order ? a.hop_order < b.hop_order : a.vertex_id < b.vertex_id;
        });
        const auto got = g.neighborhood(q, d);
        EXPECT_EQ(got, expected);
        if (d >= 2) {
          // Nested: every order d-1 entry reappears at order d.
          for (const auto& e : g.neighborhood(q, d - 1)) EXPECT_NE(std::find(got.begin(), got.end(), e), got.end());
        }
      }
    }
  }
}

TEST(Graph, JsonRoundTrip) {
  const Image img = test::textured_image(40, 30, 2);
  SlicParams p;
  p.region_count = 10;
  const RegionGraph g = build_graph(img, slic_segment(img, p), 4, 2);
  const nlohmann::json doc = graph_to_json(g);
  EXPECT_EQ(doc.at("version"), 1);
  const RegionGraph back = graph_from_json(doc);
  ASSERT_EQ(back.vertex_count(), g.vertex_count());
  EXPECT_EQ(back.edges(), g.edges());
  for (std::size_t i = 0; i < g.vertex_count(); ++i) {
    EXPECT_EQ(back.vertex(int(i)).centroid, g.vertex(int(i)).centroid);
    EXPECT_EQ(back.vertex(int(i)).area, g.vertex(int(i)).area);
    EXPECT_EQ(back.vertex(int(i)).histogram.bins, g.vertex(int(i)).histogram.bins);
  }
  EXPECT_EQ(graph_to_json(back), doc);
}

}  // namespace
}  // namespace dlo
