#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dlo/error.hpp"
#include "dlo/likelihood.hpp"
#include "dlo/synth.hpp"

namespace dlo {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr SceneKind kKinds[] = {SceneKind::homogeneous, SceneKind::crossing, SceneKind::self_crossing,
                                SceneKind::high_curvature};

TEST(Synth, SameSeedSameBytes) {
  for (SceneKind kind : kKinds) {
    const Scene a = generate_scene(random_scene_spec(kind, 42));
    const Scene b = generate_scene(random_scene_spec(kind, 42));
    EXPECT_EQ(a.image, b.image) << to_string(kind);
    EXPECT_EQ(a.truth.union_mask, b.truth.union_mask);
    EXPECT_EQ(a.endpoints, b.endpoints);
    EXPECT_NE(a.image, generate_scene(random_scene_spec(kind, 43)).image);
  }
}

TEST(Synth, UnionIsOrOfParts) {
  for (SceneKind kind : kKinds) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Scene s = generate_scene(random_scene_spec(kind, seed));
      for (std::size_t i = 0; i < s.truth.union_mask.size(); ++i) {
        bool any = false;
        for (const Mask& m : s.truth.cable_masks) any = any || m[i];
        ASSERT_EQ(s.truth.union_mask[i] != 0, any);
      }
    }
  }
}

TEST(Synth, EndpointsLieOnTheirCable) {
  for (SceneKind kind : kKinds) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Scene s = generate_scene(random_scene_spec(kind, seed));
      ASSERT_EQ(s.endpoints.size(), s.truth.cable_masks.size());
      for (std::size_t k = 0; k < s.endpoints.size(); ++k) {
        for (Point2 p : {s.endpoints[k].first, s.endpoints[k].second}) {
          EXPECT_TRUE(s.truth.cable_masks[k](static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))));
        }
      }
    }
  }
}

TEST(Synth, StraightCableStadiumArea) {
  SceneSpec spec;
  spec.cables.push_back({{{100, 200.5}, {200, 200.5}, {300, 200.5}, {400, 200.5}}, 10.0, {40, 40, 160}});
  const Scene s = generate_scene(spec);
  const double analytic = 300.0 * 10.0 + kPi * 25.0;
  EXPECT_LT(std::abs(static_cast<double>(mask_area(s.truth.union_mask)) - analytic) / analytic, 0.03);
  // Cable pixels carry the cable color up to the pixel noise.
  const Rgb c = s.image.at(250, 200);
  EXPECT_LE(std::abs(c.b - 160), spec.pixel_noise);
}

TEST(Synth, SuiteFamiliesMatchTheirDescription) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SceneSpec h = random_scene_spec(SceneKind::homogeneous, seed);
    EXPECT_EQ(h.width, 640);
    EXPECT_EQ(h.height, 480);
    EXPECT_EQ(h.background, Background::uniform);
    EXPECT_GE(h.cables.size(), 1u);
    EXPECT_LE(h.cables.size(), 3u);
    for (const CableSpec& c : h.cables) {
      EXPECT_GE(c.width_px, 8.0);
      EXPECT_LE(c.width_px, 15.0);
    }
    const Scene hs = generate_scene(h);
    for (std::size_t i = 0; i < hs.truth.union_mask.size(); ++i) {
      int n = 0;
      for (const Mask& m : hs.truth.cable_masks) n += m[i] ? 1 : 0;
      ASSERT_LE(n, 1) << "seed " << seed;
    }

    const Scene cs = generate_scene(random_scene_spec(SceneKind::crossing, seed));
    ASSERT_EQ(cs.truth.cable_count(), 2);
    std::size_t overlap = 0;
    for (std::size_t i = 0; i < cs.truth.union_mask.size(); ++i) overlap += cs.truth.cable_masks[0][i] && cs.truth.cable_masks[1][i];
    EXPECT_GT(overlap, 0u);
    EXPECT_NE(random_scene_spec(SceneKind::crossing, seed).cables[0].color,
              random_scene_spec(SceneKind::crossing, seed).cables[1].color);

    EXPECT_EQ(random_scene_spec(SceneKind::self_crossing, seed).cables.size(), 1u);
  }
}

// Turn between consecutive edges of the control polygon.
double max_turn(const std::vector<Point2>& poly) {
  double worst = 0.0;
  for (std::size_t i = 2; i < poly.size(); ++i) {
    const double a = edge_angle(poly[i - 2], poly[i - 1]), b = edge_angle(poly[i - 1], poly[i]);
    worst = std::max(worst, std::abs(wrap_angle(b - a)));
  }
  return worst;
}

TEST(Synth, PositiveFixturesHaveBoundedTurns) {
  for (SceneKind kind : {SceneKind::homogeneous, SceneKind::crossing, SceneKind::self_crossing}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      for (const CableSpec& c : random_scene_spec(kind, seed).cables) {
        EXPECT_LE(max_turn(c.control_polygon), kPi / 4.0 + 1e-9) << to_string(kind) << " " << seed;
      }
    }
  }
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const CableSpec& c : random_scene_spec(SceneKind::high_curvature, seed).cables) {
      worst = std::max(worst, max_turn(c.control_polygon));
    }
  }
  EXPECT_GT(worst, kPi / 4.0);
}

TEST(Synth, SelfCrossingCableCrossesItself) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scene s = generate_scene(random_scene_spec(SceneKind::self_crossing, seed));
    const std::vector<Point2>& pts = s.truth.cable_points.at(0);
    bool crossed = false;
    for (std::size_t i = 1; i < pts.size() && !crossed; ++i) {
      for (std::size_t j = i + 2; j < pts.size() && !crossed; ++j) {
        const Point2 r = pts[i] - pts[i - 1], q = pts[j] - pts[j - 1];
        const double den = cross(r, q);
        if (den == 0.0) continue;
        const double t = cross(pts[j - 1] - pts[i - 1], q) / den, u = cross(pts[j - 1] - pts[i - 1], r) / den;
        crossed = t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0;
      }
    }
    EXPECT_TRUE(crossed) << seed;
  }
}

TEST(Synth, BezierChainSampling) {
  const std::vector<Point2> poly{{0, 0}, {10, 30}, {50, 30}, {60, 0}, {70, -30}, {110, -30}, {120, 0}};
  const std::vector<Point2> pts = bezier_chain_points(poly);
  EXPECT_EQ(pts.front(), poly.front());
  EXPECT_EQ(pts.back(), poly.back());
  EXPECT_EQ(pts.size(), 2u * 128u + 1u);
  // Midpoint of the first segment from the Bernstein form.
  EXPECT_NEAR(pts[64].x, 0.125 * 0 + 0.375 * 10 + 0.375 * 50 + 0.125 * 60, 1e-9);
  EXPECT_NEAR(pts[64].y, 0.375 * 30 + 0.375 * 30, 1e-9);
}

TEST(Synth, SpecJsonRoundTripAndValidation) {
  for (SceneKind kind : kKinds) {
    const SceneSpec spec = random_scene_spec(kind, 9);
    const SceneSpec back = scene_spec_from_json(nlohmann::json::parse(scene_spec_to_json(spec).dump()));
    EXPECT_EQ(generate_scene(back).image, generate_scene(spec).image);
  }
  SceneSpec bad;
  bad.cables.push_back({{{10, 10}, {20, 10}, {30, 10}, {900, 10}}, 10.0, {}});
  EXPECT_THROW(bad.validate(), Error);
  bad.cables[0].control_polygon.back() = {40, 10};
  bad.cables[0].width_px = 2.0;
  EXPECT_THROW(generate_scene(bad), Error);
  EXPECT_THROW(scene_kind_from_string("spiral"), Error);
  EXPECT_EQ(scene_kind_from_string("self_crossing"), SceneKind::self_crossing);
}

}  // namespace
}  // namespace dlo
