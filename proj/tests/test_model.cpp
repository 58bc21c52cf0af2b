#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dlo/error.hpp"
#include "dlo/model.hpp"
#include "support.hpp"

namespace dlo {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Point2> quarter_circle(int n, double radius) {
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) {
    const double t = 0.5 * kPi * i / (n - 1);
    pts.push_back({radius * std::cos(t), radius * std::sin(t)});
  }
  return pts;
}

std::vector<Point2> random_walk_points(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> step(-15.0, 15.0);
  std::vector<Point2> pts{{100, 100}};
  while (static_cast<int>(pts.size()) < n) pts.push_back(pts.back() + Point2{10.0 + std::abs(step(rng)), step(rng)});
  return pts;
}

TEST(Spline, CollinearInputStaysOnTheLine) {
  std::vector<Point2> pts;
  double x = 0.0;
  for (int i = 0; i < 10; ++i) {
    pts.push_back({x, 2.0 * x + 3.0});
    x += 3.0 + (i % 3) * 4.5;
  }
  const SplineModel m = fit_spline(pts);
  for (const Point2& p : sample_spline(m, 0.5)) EXPECT_LT(std::abs(2.0 * p.x - p.y + 3.0) / std::sqrt(5.0), 1e-6);
  for (const Point2& c : m.control_points) EXPECT_LT(std::abs(2.0 * c.x - c.y + 3.0) / std::sqrt(5.0), 1e-6);
}

TEST(Spline, QuarterCircleResidualAndLength) {
  const std::vector<Point2> pts = quarter_circle(20, 100.0);
  const SplineModel m = fit_spline(pts);
  const std::vector<double> t = chord_length_parameters(pts);
  double sq = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point2 d = evaluate_spline(m, t[i]) - pts[i];
    sq += dot(d, d);
  }
  EXPECT_LT(std::sqrt(sq / pts.size()), 0.5);
  const double length = polyline_length(sample_spline(m, 1.0));
  EXPECT_LT(std::abs(length - 50.0 * kPi) / (50.0 * kPi), 0.01);
}

TEST(Spline, FourPointsGiveAnInterpolatingBezier) {
  const std::vector<Point2> pts{{0, 0}, {10, 25}, {40, 30}, {60, 0}};
  const SplineModel m = fit_spline(pts);
  ASSERT_EQ(m.control_points.size(), 4u);
  EXPECT_EQ(m.knots, (std::vector<double>{0, 0, 0, 0, 1, 1, 1, 1}));
  // Bernstein evaluation of the control polygon.
  const auto bezier = [&](double t) {
    const double s = 1.0 - t;
    const auto& c = m.control_points;
    return s * s * s * c[0] + 3.0 * s * s * t * c[1] + 3.0 * s * t * t * c[2] + t * t * t * c[3];
  };
  const std::vector<double> t = chord_length_parameters(pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_LT(euclidean_distance(bezier(t[i]), pts[i]), 1e-9);
    EXPECT_LT(euclidean_distance(evaluate_spline(m, t[i]), pts[i]), 1e-9);
  }
  EXPECT_EQ(m.control_points.front(), pts.front());
  EXPECT_EQ(m.control_points.back(), pts.back());
}

TEST(Spline, KnotVectorIsClampedAndUniform) {
  for (int n = 4; n <= 60; ++n) {
    const SplineModel m = fit_spline(random_walk_points(n, n));
    const int interior = std::min(static_cast<int>(std::floor(std::sqrt(n))), n - 4);
    ASSERT_EQ(m.knots.size(), m.control_points.size() + 4);
    ASSERT_EQ(m.knots.size(), static_cast<std::size_t>(interior + 8)) << n;
    for (int k = 0; k < 4; ++k) {
      EXPECT_EQ(m.knots[k], 0.0);
      EXPECT_EQ(m.knots[m.knots.size() - 1 - k], 1.0);
    }
    for (int k = 1; k <= interior; ++k) EXPECT_NEAR(m.knots[3 + k], static_cast<double>(k) / (interior + 1), 1e-12);
    EXPECT_TRUE(std::is_sorted(m.knots.begin(), m.knots.end()));
  }
}

TEST(Spline, EndpointsAreInterpolated) {
  for (int n : {5, 12, 40}) {
    const std::vector<Point2> pts = random_walk_points(n, 7 * n);
    const SplineModel m = fit_spline(pts);
    EXPECT_LT(euclidean_distance(evaluate_spline(m, 0.0), pts.front()), 1e-9);
    EXPECT_LT(euclidean_distance(evaluate_spline(m, 1.0), pts.back()), 1e-9);
  }
}

TEST(Spline, TranslationMovesControlPointsExactly) {
  const std::vector<Point2> pts = random_walk_points(25, 3);
  const Point2 shift{37.25, -12.5};
  std::vector<Point2> moved;
  for (const Point2& p : pts) moved.push_back(p + shift);
  const SplineModel a = fit_spline(pts), b = fit_spline(moved);
  ASSERT_EQ(a.control_points.size(), b.control_points.size());
  for (std::size_t k = 0; k < a.knots.size(); ++k) EXPECT_NEAR(a.knots[k], b.knots[k], 1e-12);
  for (std::size_t i = 0; i < a.control_points.size(); ++i) {
    EXPECT_LT(euclidean_distance(a.control_points[i] + shift, b.control_points[i]), 1e-9);
  }
}

TEST(Spline, RotationAndScaleCommuteWithFit) {
  const std::vector<Point2> pts = random_walk_points(30, 11);
  const double c = std::cos(0.7), s = std::sin(0.7), k = 1.75;
  const auto map = [&](Point2 p) { return Point2{k * (c * p.x - s * p.y) + 5.0, k * (s * p.x + c * p.y) - 8.0}; };
  std::vector<Point2> moved;
  for (const Point2& p : pts) moved.push_back(map(p));
  const SplineModel a = fit_spline(pts), b = fit_spline(moved);
  for (std::size_t i = 0; i < a.control_points.size(); ++i) {
    EXPECT_LT(euclidean_distance(map(a.control_points[i]), b.control_points[i]), 1e-9);
  }
}

TEST(Spline, RejectsBadInput) {
  EXPECT_THROW(fit_spline(std::vector<Point2>{{0, 0}, {1, 1}, {2, 0}}), Error);
  EXPECT_THROW(fit_spline(std::vector<Point2>(6, Point2{4, 4})), Error);
  const std::vector<Point2> dup{{0, 0}, {0, 0}, {10, 0}, {20, 5}, {30, 0}};
  EXPECT_EQ(collapse_consecutive_duplicates(dup).size(), 4u);
}

TEST(Spline, SamplesRespectTheGap) {
  const SplineModel m = fit_spline(quarter_circle(20, 100.0));
  for (double gap : {0.25, 1.0, 3.0}) {
    const std::vector<Point2> s = sample_spline(m, gap);
    EXPECT_EQ(s.front(), evaluate_spline(m, 0.0));
    EXPECT_EQ(s.back(), evaluate_spline(m, 1.0));
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(euclidean_distance(s[i - 1], s[i]), gap + 1e-12);
  }
  const SplineModel line = fit_spline(std::vector<Point2>{{0, 0}, {25, 0}, {50, 0}, {75, 0}, {100, 0}});
  EXPECT_GE(sample_spline(line, 1.0).size(), 101u);
}

SplineModel straight(Point2 a, Point2 b, double thickness) {
  std::vector<Point2> pts;
  for (int i = 0; i <= 5; ++i) pts.push_back(a + (i / 5.0) * (b - a));
  SplineModel m = fit_spline(pts);
  m.thickness_px = thickness;
  return m;
}

TEST(Mask, StadiumArea) {
  const SplineModel m = straight({100.3, 100.6}, {200.3, 100.6}, 5.0);
  const Mask mask = render_mask(m, 300, 200);
  const double analytic = 500.0 + kPi * 2.5 * 2.5;
  EXPECT_LT(std::abs(static_cast<double>(mask_area(mask)) - analytic) / analytic, 0.03);
  // Membership of pixel centers (integer coordinates) in the exact stadium.
  for (int y = 0; y < 200; ++y) {
    for (int x = 0; x < 300; ++x) {
      const double d = point_segment_distance({double(x), double(y)}, {100.3, 100.6}, {200.3, 100.6});
      if (std::abs(d - 2.5) > 1e-6) EXPECT_EQ(mask(x, y) != 0, d < 2.5) << x << "," << y;
    }
  }
}

TEST(Mask, ClippedToTheImage) {
  const SplineModel m = straight({-50, 10}, {80, 10}, 9.0);
  const Mask mask = render_mask(m, 40, 30);
  EXPECT_EQ(mask.width(), 40);
  EXPECT_EQ(mask.height(), 30);
  EXPECT_EQ(mask_area(mask), 40u * 9u);
  EXPECT_EQ(mask_area(render_mask(straight({500, 500}, {600, 600}, 4.0), 40, 30)), 0u);
}

Walk closed_walk(int id, std::vector<int> vertices, int from, int to) {
  Walk w;
  w.id = id;
  w.vertices = std::move(vertices);
  w.seed_start = from;
  w.seed_end = to;
  w.status = WalkStatus::closed;
  return w;
}

TEST(Thickness, EquivalentSideExamples) {
  const RegionGraph uniform({test::vertex(0, {0, 0}, test::spike(0), 100), test::vertex(1, {10, 0}, test::spike(0), 100),
                             test::vertex(2, {20, 0}, test::spike(0), 100)},
                            std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}, 1);
  EXPECT_DOUBLE_EQ(estimate_thickness(closed_walk(0, {0, 1, 2}, 0, 1), uniform), 10.0);
  const RegionGraph mixed({test::vertex(0, {0, 0}, test::spike(0), 64), test::vertex(1, {10, 0}, test::spike(0), 144)},
                          std::vector<std::pair<int, int>>{{0, 1}}, 1);
  EXPECT_DOUBLE_EQ(estimate_thickness(closed_walk(0, {0, 1, 0}, 0, 1), mixed), 10.0);
  EXPECT_DOUBLE_EQ(estimate_thickness(closed_walk(0, {0, 1}, 0, 1), mixed, ThicknessStrategy::area_per_length, 20.8),
                   10.0);
  const RegionGraph tiny({test::vertex(0, {0, 0}, test::spike(0), 0)}, std::vector<std::pair<int, int>>{}, 1);
  EXPECT_EQ(estimate_thickness(closed_walk(0, {0}, 0, 1), tiny), 1.0);
}

TEST(Thickness, GapFillingFollowsTheSegment) {
  // Chain 0-1-2-3 along y = 0 with a detour 0-4-5-3 above it.
  const RegionGraph g({test::vertex(0, {0, 0}, test::spike(0)), test::vertex(1, {10, 0}, test::spike(0)),
                       test::vertex(2, {20, 0}, test::spike(0)), test::vertex(3, {30, 0}, test::spike(0)),
                       test::vertex(4, {8, 9}, test::spike(0)), test::vertex(5, {22, 9}, test::spike(0))},
                      std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {0, 4}, {4, 5}, {5, 3}}, 3);
  EXPECT_EQ(fill_walk_gaps(closed_walk(0, {0, 3}, 0, 1), g), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(fill_walk_gaps(closed_walk(0, {0, 2, 3}, 0, 1), g), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(fill_walk_gaps(closed_walk(0, {4, 3}, 0, 1), g), (std::vector<int>{4, 5, 3}));
}

TEST(Thickness, TubeOfWidthTwelve) {
  // A horizontal tube tiled by 12 x 20 superpixels, with 20 x 20 background cells around it.
  const int w = 200, h = 60;
  const Image img(w, h);
  const LabelField labels = test::label_field(w, h, [](int x, int y) {
    const int col = x / 20;
    if (y >= 24 && y < 36) return 30 + col;
    return y < 24 ? col : 10 + col;
  });
  const SuperpixelMap map = make_superpixel_map(img, test::label_field(w, h, [&](int x, int y) {
                                                  const int l = labels(x, y);
                                                  return l >= 30 ? l - 10 : l;
                                                }),
                                                20.0);
  const RegionGraph g = build_graph(img, map, 8, 2);
  Walk walk = closed_walk(0, {}, 0, 1);
  for (int col = 0; col < 10; ++col) walk.vertices.push_back(map.region_at({col * 20.0 + 10.0, 30.0}));
  const double side = estimate_thickness(walk, g);
  EXPECT_GE(side, 8.0);
  EXPECT_LE(side, 18.0);
  const std::vector<int> full = walk.vertices;
  walk.vertices = {full[0], full[2], full[4], full[5], full[7], full[9]};
  EXPECT_DOUBLE_EQ(estimate_thickness(walk, g, ThicknessStrategy::area_per_length, 200.0), 12.0);
}

struct TwoLines {
  RegionGraph graph;
  std::vector<Seed> seeds;
  std::vector<Walk> walks;

  TwoLines() {
    std::vector<GraphVertex> vs;
    std::vector<std::pair<int, int>> es;
    for (int i = 0; i < 8; ++i) vs.push_back(test::vertex(i, {20.0 + 20.0 * i, 40.0}, test::spike(0), 120));
    for (int i = 0; i < 8; ++i) vs.push_back(test::vertex(8 + i, {90.0, 10.0 + 12.0 * i}, test::spike(1), 120));
    for (int i = 0; i + 1 < 8; ++i) es.push_back({i, i + 1}), es.push_back({8 + i, 9 + i});
    graph = RegionGraph(vs, es, 1);
    seeds = {{0, 0, {15, 40}}, {1, 7, {165, 40}}, {2, 8, {90, 5}}, {3, 15, {90, 99}}};
    walks = {closed_walk(0, {0, 1, 2, 3, 4, 5, 6, 7}, 0, 1), closed_walk(1, {8, 9, 10, 11, 12, 13, 14, 15}, 2, 3)};
  }
};

TEST(Segmentation, UnionIsOrOfParts) {
  const TwoLines f;
  for (auto backend : {kernels::Backend::serial, kernels::Backend::parallel}) {
    const SegmentationResult r = segment_walks(f.walks, f.graph, f.seeds, SplineOptions{}, 180, 110, backend);
    ASSERT_EQ(r.object_masks.size(), 2u);
    EXPECT_EQ(r.walk_ids, (std::vector<int>{0, 1}));
    const LabelField labels = r.label_image();
    std::size_t overlap = 0;
    for (std::size_t i = 0; i < r.union_mask.size(); ++i) {
      ASSERT_EQ(r.union_mask[i] != 0, r.object_masks[0][i] || r.object_masks[1][i]);
      overlap += r.object_masks[0][i] && r.object_masks[1][i];
      const int want = r.object_masks[1][i] ? 2 : r.object_masks[0][i] ? 1 : 0;
      ASSERT_EQ(labels[i], want);
    }
    EXPECT_GT(overlap, 0u);
  }
}

TEST(Segmentation, AnchoredEndsReachTheSeeds) {
  const TwoLines f;
  SplineOptions anchored;
  const SplineModel a = model_walk(f.walks[0], f.graph, f.seeds, anchored);
  EXPECT_LT(euclidean_distance(evaluate_spline(a, 0.0), f.seeds[0].source_point), 1e-9);
  EXPECT_LT(euclidean_distance(evaluate_spline(a, 1.0), f.seeds[1].source_point), 1e-9);
  SplineOptions loose;
  loose.anchor_endpoints = false;
  const SplineModel b = model_walk(f.walks[0], f.graph, f.seeds, loose);
  EXPECT_LT(euclidean_distance(evaluate_spline(b, 0.0), f.graph.vertex(0).centroid), 1e-9);
  EXPECT_EQ(b.color, (Rgb{0, 0, 0}));
}

TEST(Segmentation, SplineJsonRoundTrip) {
  const TwoLines f;
  const SplineModel m = model_walk(f.walks[1], f.graph, f.seeds, SplineOptions{});
  const nlohmann::json doc = spline_to_json(m, 2.0);
  EXPECT_EQ(doc.at("points").size(), sample_spline(m, 2.0).size());
  const SplineModel back = spline_from_json(nlohmann::json::parse(doc.dump()));
  EXPECT_EQ(back.degree, m.degree);
  EXPECT_EQ(back.knots, m.knots);
  EXPECT_EQ(back.control_points, m.control_points);
  EXPECT_EQ(back.thickness_px, m.thickness_px);
  EXPECT_EQ(back.color, m.color);
  nlohmann::json broken = doc;
  broken["knots"].erase(0);
  EXPECT_THROW(spline_from_json(broken), Error);
  EXPECT_THROW(spline_from_json(nlohmann::json::object()), Error);
}

}  // namespace
}  // namespace dlo
