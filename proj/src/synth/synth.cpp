#include "dlo/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "dlo/model.hpp"

namespace dlo {
namespace {

// mt19937_64 output is fixed by the standard; range reduction is done here
// so results do not depend on the library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  int uniform(int lo, int hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return lo + static_cast<int>(v % range);
  }
  bool coin() { return uniform(0, 1) == 1; }

 private:
  std::mt19937_64 engine_;
};

// Rotations with rational cosine/sine (Pythagorean triples), so turning a
// tangent needs no transcendental functions. Angles in degrees: 0, 8.8, 16.3,
// 22.6, 28.1, 36.9, 43.6, 53.1, 61.9, 67.4, 73.7, 90.
struct Rotation {
  double c, s;
};
constexpr std::array<Rotation, 12> kRotations{{{1.0, 0.0},
                                               {84.0 / 85.0, 13.0 / 85.0},
                                               {24.0 / 25.0, 7.0 / 25.0},
                                               {12.0 / 13.0, 5.0 / 13.0},
                                               {15.0 / 17.0, 8.0 / 17.0},
                                               {4.0 / 5.0, 3.0 / 5.0},
                                               {21.0 / 29.0, 20.0 / 29.0},
                                               {3.0 / 5.0, 4.0 / 5.0},
                                               {8.0 / 17.0, 15.0 / 17.0},
                                               {5.0 / 13.0, 12.0 / 13.0},
                                               {7.0 / 25.0, 24.0 / 25.0},
                                               {0.0, 1.0}}};
constexpr int kMaxSmoothTurn = 6;  // 43.6 degrees, the largest turn used on smooth cables

Point2 rotate(Point2 v, int index, bool negative) {
  const Rotation r = kRotations[index];
  const double s = negative ? -r.s : r.s;
  return {r.c * v.x - s * v.y, s * v.x + r.c * v.y};
}

Point2 normalized(Point2 v) {
  const double n = std::sqrt(dot(v, v));
  return {v.x / n, v.y / n};
}

struct Turn {
  int index;
  bool negative;
};

// C1 Bezier chain from `start` with tangent `tangent`; segment i turns the tangent by turns[i].
std::vector<Point2> build_chain(Point2 start, Point2 tangent, const std::vector<Turn>& turns,
                                const std::vector<int>& lengths) {
  std::vector<Point2> poly{start};
  Point2 q = start;
  Point2 t = normalized(tangent);
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Point2 next_t = normalized(rotate(t, turns[i].index, turns[i].negative));
    const double len = lengths[i];
    const Point2 next_q = q + len * normalized(t + next_t);
    poly.push_back(q + (len / 3.0) * t);
    poly.push_back(next_q - (len / 3.0) * next_t);
    poly.push_back(next_q);
    q = next_q;
    t = next_t;
  }
  return poly;
}

// Translates the polygon so its bounding box sits near the canvas centre.
void centre_on_canvas(Rng& rng, std::vector<Point2>& poly, int width, int height) {
  double x0 = poly[0].x, x1 = x0, y0 = poly[0].y, y1 = y0;
  for (const Point2& p : poly) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  const Point2 shift{std::round((width - 1) / 2.0 - (x0 + x1) / 2.0) + rng.uniform(-30, 30),
                     std::round((height - 1) / 2.0 - (y0 + y1) / 2.0) + rng.uniform(-30, 30)};
  for (Point2& p : poly) p = p + shift;
}

std::vector<Point2> reversed(std::vector<Point2> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

bool inside(const std::vector<Point2>& pts, double margin, int width, int height) {
  return std::all_of(pts.begin(), pts.end(), [&](Point2 p) {
    return p.x >= margin && p.y >= margin && p.x <= width - 1 - margin && p.y <= height - 1 - margin;
  });
}

double min_distance(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point2& p : a) {
    for (std::size_t j = 1; j < b.size(); ++j) best = std::min(best, point_segment_distance(p, b[j - 1], b[j]));
  }
  return best;
}

bool segments_cross(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

int crossing_count(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  int count = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    for (std::size_t j = 1; j < b.size(); ++j) count += segments_cross(a[i - 1], a[i], b[j - 1], b[j]) ? 1 : 0;
  }
  return count;
}

int self_crossing_count(const std::vector<Point2>& a) {
  int count = 0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    for (std::size_t j = i + 2; j < a.size(); ++j) count += segments_cross(a[i - 1], a[i], a[j - 1], a[j]) ? 1 : 0;
  }
  return count;
}

// True when parts of the curve far apart along its length come closer than `gap`.
bool folds_back(const std::vector<Point2>& pts, double gap, double arc_separation) {
  std::vector<double> arc(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) arc[i] = arc[i - 1] + euclidean_distance(pts[i - 1], pts[i]);
  for (std::size_t i = 0; i < pts.size(); i += 4) {
    for (std::size_t j = i + 1; j < pts.size(); j += 4) {
      if (arc[j] - arc[i] > arc_separation && euclidean_distance(pts[i], pts[j]) < gap) return true;
    }
  }
  return false;
}

constexpr std::array<Rgb, 8> kCableColors{{{200, 30, 30},
                                           {30, 60, 200},
                                           {20, 140, 40},
                                           {230, 160, 0},
                                           {120, 30, 150},
                                           {25, 25, 25},
                                           {0, 150, 160},
                                           {220, 80, 160}}};
constexpr std::array<Rgb, 5> kBackgrounds{{{235, 235, 230}, {205, 170, 125}, {170, 200, 230}, {200, 200, 200}, {230, 220, 170}}};

double color_distance(Rgb a, Rgb b) {
  const double dr = a.r - b.r, dg = a.g - b.g, db = a.b - b.b;
  return std::sqrt(dr * dr + dg * dg + db * db);
}

Rgb pick_cable_color(Rng& rng, Rgb background, const std::vector<Rgb>& taken) {
  for (;;) {
    const Rgb c = kCableColors[rng.uniform(0, kCableColors.size() - 1)];
    if (color_distance(c, background) < 120.0) continue;
    if (std::any_of(taken.begin(), taken.end(), [&](Rgb t) { return color_distance(c, t) < 100.0; })) continue;
    return c;
  }
}

Point2 random_direction(Rng& rng) {
  for (;;) {
    const Point2 v{static_cast<double>(rng.uniform(-100, 100)), static_cast<double>(rng.uniform(-100, 100))};
    const double n2 = dot(v, v);
    if (n2 >= 2500.0 && n2 <= 10000.0) return normalized(v);
  }
}

std::vector<Point2> random_smooth_cable(Rng& rng, const SceneSpec& spec, double width) {
  const int segments = rng.uniform(2, 4);
  std::vector<Turn> turns;
  std::vector<int> lengths;
  for (int i = 0; i < segments; ++i) {
    turns.push_back({rng.uniform(0, kMaxSmoothTurn), rng.coin()});
    lengths.push_back(rng.uniform(80, 150));
  }
  const double margin = width / 2.0 + 12.0;
  const Point2 start{static_cast<double>(rng.uniform(static_cast<int>(margin), spec.width - 1 - static_cast<int>(margin))),
                     static_cast<double>(rng.uniform(static_cast<int>(margin), spec.height - 1 - static_cast<int>(margin)))};
  return build_chain(start, random_direction(rng), turns, lengths);
}

SceneSpec homogeneous_spec(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.rng_seed = seed;
  spec.background_color = kBackgrounds[rng.uniform(0, kBackgrounds.size() - 1)];
  const int cables = rng.uniform(1, 3);
  std::vector<std::vector<Point2>> placed;
  std::vector<Rgb> colors;
  for (int c = 0; c < cables; ++c) {
    for (int attempt = 0; attempt < 500; ++attempt) {
      const double w = rng.uniform(8, 15);
      const std::vector<Point2> poly = random_smooth_cable(rng, spec, w);
      const std::vector<Point2> pts = bezier_chain_points(poly);
      if (!inside(pts, w / 2.0 + 12.0, width, height)) continue;
      if (folds_back(pts, 60.0, 120.0)) continue;
      bool clear = true;
      for (std::size_t k = 0; k < placed.size() && clear; ++k) {
        clear = min_distance(pts, placed[k]) > 60.0 + w;
      }
      if (!clear) continue;
      const Rgb color = pick_cable_color(rng, spec.background_color, colors);
      colors.push_back(color);
      placed.push_back(pts);
      spec.cables.push_back({poly, w, color});
      break;
    }
  }
  return spec;
}

// Half-chains leaving `center` forwards and backwards, joined into one cable through it.
std::vector<Point2> cable_through(Rng& rng, Point2 center, Point2 tangent, int max_turn) {
  const auto half = [&](Point2 t) {
    const int segments = rng.uniform(1, 2);
    std::vector<Turn> turns;
    std::vector<int> lengths;
    for (int i = 0; i < segments; ++i) {
      turns.push_back({rng.uniform(0, max_turn), rng.coin()});
      lengths.push_back(rng.uniform(90, 140));
    }
    return build_chain(center, t, turns, lengths);
  };
  std::vector<Point2> backward = reversed(half(-1.0 * tangent));
  const std::vector<Point2> forward = half(tangent);
  backward.insert(backward.end(), forward.begin() + 1, forward.end());
  return backward;
}

SceneSpec crossing_spec(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.rng_seed = seed;
  spec.background_color = kBackgrounds[rng.uniform(0, kBackgrounds.size() - 1)];
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Point2 center{static_cast<double>(width / 2 + rng.uniform(-60, 60)),
                        static_cast<double>(height / 2 + rng.uniform(-50, 50))};
    const Point2 ta = random_direction(rng);
    const Point2 tb = rotate(ta, rng.uniform(7, 11), rng.coin());
    const double wa = rng.uniform(8, 15);
    const double wb = rng.uniform(8, 15);
    const std::vector<Point2> pa = cable_through(rng, center, ta, 3);
    // Offset so the two chains do not share a vertex, which the strict crossing test would miss.
    const std::vector<Point2> pb = cable_through(rng, center + Point2{0.375, 0.625}, tb, 3);
    const std::vector<Point2> da = bezier_chain_points(pa);
    const std::vector<Point2> db = bezier_chain_points(pb);
    if (!inside(da, wa / 2.0 + 12.0, width, height) || !inside(db, wb / 2.0 + 12.0, width, height)) continue;
    if (crossing_count(da, db) != 1) continue;
    if (min_distance({da.front(), da.back()}, db) < 70.0 || min_distance({db.front(), db.back()}, da) < 70.0) continue;
    const Rgb ca = pick_cable_color(rng, spec.background_color, {});
    const Rgb cb = pick_cable_color(rng, spec.background_color, {ca});
    spec.cables.push_back({pa, wa, ca});
    spec.cables.push_back({pb, wb, cb});
    return spec;
  }
  fail(ErrorCode::invalid_config, "could not place crossing cables");
}

SceneSpec self_crossing_spec(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.rng_seed = seed;
  spec.background_color = kBackgrounds[rng.uniform(0, kBackgrounds.size() - 1)];
  for (int attempt = 0; attempt < 2000; ++attempt) {
    const double w = rng.uniform(8, 12);
    const bool negative = rng.coin();
    std::vector<Turn> turns;
    std::vector<int> lengths;
    turns.push_back({rng.uniform(0, 2), rng.coin()});
    lengths.push_back(rng.uniform(110, 150));
    // Six 43.6 degree turns bring the cable back across its own entry tail at
    // roughly a right angle.
    const int loop_segments = 6;
    const int loop_length = rng.uniform(45, 55);
    for (int i = 0; i < loop_segments; ++i) {
      turns.push_back({kMaxSmoothTurn, negative});
      lengths.push_back(loop_length);
    }
    turns.push_back({rng.uniform(0, 2), rng.coin()});
    lengths.push_back(rng.uniform(190, 230));

    std::vector<Point2> poly = build_chain({0.0, 0.0}, random_direction(rng), turns, lengths);
    centre_on_canvas(rng, poly, width, height);
    const std::vector<Point2> pts = bezier_chain_points(poly);
    if (!inside(pts, w / 2.0 + 12.0, width, height)) continue;
    if (self_crossing_count(pts) != 1) continue;
    // Keep the tails' endpoints clear of the rest of the cable.
    const std::vector<Point2> head(pts.begin() + pts.size() / 8, pts.end());
    const std::vector<Point2> tail(pts.begin(), pts.end() - pts.size() / 8);
    if (min_distance({pts.front()}, head) < 60.0 || min_distance({pts.back()}, tail) < 60.0) continue;
    if (euclidean_distance(pts.front(), pts.back()) < 150.0) continue;
    spec.cables.push_back({poly, w, pick_cable_color(rng, spec.background_color, {})});
    return spec;
  }
  fail(ErrorCode::invalid_config, "could not place a self-crossing cable");
}

SceneSpec high_curvature_spec(std::uint64_t seed, int width, int height) {
  Rng rng(seed);
  SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.rng_seed = seed;
  spec.background_color = kBackgrounds[rng.uniform(0, kBackgrounds.size() - 1)];
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double w = rng.uniform(8, 12);
    std::vector<Turn> turns;
    std::vector<int> lengths;
    const int segments = rng.uniform(4, 6);
    bool negative = rng.coin();
    for (int i = 0; i < segments; ++i) {
      turns.push_back({11, negative});
      negative = !negative;
      lengths.push_back(rng.uniform(45, 70));
    }
    const Point2 start{static_cast<double>(rng.uniform(60, width - 61)), static_cast<double>(rng.uniform(60, height - 61))};
    const std::vector<Point2> poly = build_chain(start, random_direction(rng), turns, lengths);
    if (!inside(bezier_chain_points(poly), w / 2.0 + 12.0, width, height)) continue;
    spec.cables.push_back({poly, w, pick_cable_color(rng, spec.background_color, {})});
    return spec;
  }
  fail(ErrorCode::invalid_config, "could not place a high-curvature cable");
}

}  // namespace

const char* to_string(Background background) {
  switch (background) {
    case Background::uniform: return "uniform";
    case Background::checkerboard: return "checkerboard";
    case Background::noise: return "noise";
  }
  return "uniform";
}

Background background_from_string(const std::string& name) {
  if (name == "uniform") return Background::uniform;
  if (name == "checkerboard") return Background::checkerboard;
  if (name == "noise") return Background::noise;
  fail(ErrorCode::invalid_config, "unknown background '" + name + "'");
}

const char* to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::homogeneous: return "homogeneous";
    case SceneKind::crossing: return "crossing";
    case SceneKind::self_crossing: return "self_crossing";
    case SceneKind::high_curvature: return "high_curvature";
  }
  return "homogeneous";
}

SceneKind scene_kind_from_string(const std::string& name) {
  if (name == "homogeneous") return SceneKind::homogeneous;
  if (name == "crossing") return SceneKind::crossing;
  if (name == "self_crossing") return SceneKind::self_crossing;
  if (name == "high_curvature") return SceneKind::high_curvature;
  fail(ErrorCode::invalid_config, "unknown scene kind '" + name + "'");
}

std::vector<Point2> bezier_chain_points(const std::vector<Point2>& poly) {
  require(poly.size() >= 4 && (poly.size() - 1) % 3 == 0, "Bezier chain needs 3k + 1 control points");
  constexpr int kSamples = 128;
  std::vector<Point2> out{poly.front()};
  for (std::size_t s = 0; s + 3 < poly.size(); s += 3) {
    const Point2 p0 = poly[s], p1 = poly[s + 1], p2 = poly[s + 2], p3 = poly[s + 3];
    for (int j = 1; j <= kSamples; ++j) {
      const double t = static_cast<double>(j) / kSamples;
      const double u = 1.0 - t;
      const double b0 = u * u * u, b1 = 3.0 * u * u * t, b2 = 3.0 * u * t * t, b3 = t * t * t;
      out.push_back({b0 * p0.x + b1 * p1.x + b2 * p2.x + b3 * p3.x, b0 * p0.y + b1 * p1.y + b2 * p2.y + b3 * p3.y});
    }
  }
  return out;
}

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0) fail(ErrorCode::invalid_config, "scene dimensions must be positive");
  if (checker_px < 1) fail(ErrorCode::invalid_config, "checker size must be positive");
  if (pixel_noise < 0 || pixel_noise > 64) fail(ErrorCode::invalid_config, "pixel noise must lie in [0, 64]");
  for (const CableSpec& c : cables) {
    if (c.width_px < 3.0) fail(ErrorCode::invalid_config, "cable width must be at least 3 px");
    if (c.control_polygon.size() < 4 || (c.control_polygon.size() - 1) % 3 != 0) {
      fail(ErrorCode::invalid_config, "cable control polygon needs 3k + 1 points");
    }
    if (!inside(bezier_chain_points(c.control_polygon), c.width_px / 2.0, width, height)) {
      fail(ErrorCode::invalid_config, "cable leaves the image bounds");
    }
  }
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.rng_seed ^ 0x9E3779B97F4A7C15ull);
  Image image(spec.width, spec.height, spec.background_color);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      switch (spec.background) {
        case Background::uniform:
          break;
        case Background::checkerboard:
          if (((x / spec.checker_px) + (y / spec.checker_px)) % 2 == 1) image.set(x, y, spec.background_alt);
          break;
        case Background::noise: {
          const int t = rng.uniform(0, 255);
          const auto mix = [t](int a, int b) { return static_cast<std::uint8_t>(a + (b - a) * t / 255); };
          const Rgb a = spec.background_color, b = spec.background_alt;
          image.set(x, y, {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)});
          break;
        }
      }
    }
  }

  Scene scene;
  for (const CableSpec& cable : spec.cables) {
    std::vector<Point2> centerline = bezier_chain_points(cable.control_polygon);
    Mask mask = render_polyline(centerline, cable.width_px, spec.width, spec.height, kernels::Backend::serial);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        if (mask(x, y)) image.set(x, y, cable.color);
      }
    }
    scene.endpoints.emplace_back(centerline.front(), centerline.back());
    scene.truth.cable_masks.push_back(std::move(mask));
    scene.truth.cable_points.push_back(std::move(centerline));
  }
  scene.truth.union_mask = mask_union(scene.truth.cable_masks, spec.width, spec.height);

  if (spec.pixel_noise > 0) {
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        Rgb c = image.at(x, y);
        const auto jitter = [&](std::uint8_t v) {
          return static_cast<std::uint8_t>(std::clamp(v + rng.uniform(-spec.pixel_noise, spec.pixel_noise), 0, 255));
        };
        c = {jitter(c.r), jitter(c.g), jitter(c.b)};
        image.set(x, y, c);
      }
    }
  }
  scene.image = std::move(image);
  return scene;
}

SceneSpec random_scene_spec(SceneKind kind, std::uint64_t seed, int width, int height) {
  switch (kind) {
    case SceneKind::homogeneous: return homogeneous_spec(seed, width, height);
    case SceneKind::crossing: return crossing_spec(seed, width, height);
    case SceneKind::self_crossing: return self_crossing_spec(seed, width, height);
    case SceneKind::high_curvature: return high_curvature_spec(seed, width, height);
  }
  return homogeneous_spec(seed, width, height);
}

nlohmann::json scene_spec_to_json(const SceneSpec& spec) {
  const auto rgb = [](Rgb c) { return nlohmann::json{c.r, c.g, c.b}; };
  nlohmann::json cables = nlohmann::json::array();
  for (const CableSpec& c : spec.cables) {
    nlohmann::json poly = nlohmann::json::array();
    for (const Point2& p : c.control_polygon) poly.push_back({p.x, p.y});
    cables.push_back({{"control_polygon", std::move(poly)}, {"width_px", c.width_px}, {"color", rgb(c.color)}});
  }
  return {{"version", 1},
          {"width", spec.width},
          {"height", spec.height},
          {"background", to_string(spec.background)},
          {"background_color", rgb(spec.background_color)},
          {"background_alt", rgb(spec.background_alt)},
          {"checker_px", spec.checker_px},
          {"pixel_noise", spec.pixel_noise},
          {"rng_seed", spec.rng_seed},
          {"cables", std::move(cables)}};
}

SceneSpec scene_spec_from_json(const nlohmann::json& doc) {
  try {
    const auto rgb = [](const nlohmann::json& j) {
      return Rgb{j.at(0).get<std::uint8_t>(), j.at(1).get<std::uint8_t>(), j.at(2).get<std::uint8_t>()};
    };
    SceneSpec spec;
    spec.width = doc.value("width", spec.width);
    spec.height = doc.value("height", spec.height);
    spec.background = background_from_string(doc.value("background", std::string("uniform")));
    if (doc.contains("background_color")) spec.background_color = rgb(doc.at("background_color"));
    if (doc.contains("background_alt")) spec.background_alt = rgb(doc.at("background_alt"));
    spec.checker_px = doc.value("checker_px", spec.checker_px);
    spec.pixel_noise = doc.value("pixel_noise", spec.pixel_noise);
    spec.rng_seed = doc.value("rng_seed", spec.rng_seed);
    for (const auto& jc : doc.value("cables", nlohmann::json::array())) {
      CableSpec c;
      for (const auto& p : jc.at("control_polygon")) c.control_polygon.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      c.width_px = jc.at("width_px").get<double>();
      c.color = rgb(jc.at("color"));
      spec.cables.push_back(std::move(c));
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_config, std::string("malformed scene spec: ") + e.what());
  }
}

}  // namespace dlo
