#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dlo/eval.hpp"
#include "dlo/geometry.hpp"
#include "dlo/image.hpp"

namespace dlo {

enum class Background { uniform, checkerboard, noise };
const char* to_string(Background background);
Background background_from_string(const std::string& name);

struct CableSpec {
  // Cubic Bezier chain: 3k + 1 control points, segment i uses points 3i .. 3i + 3.
  std::vector<Point2> control_polygon;
  double width_px = 10.0;
  Rgb color;
};

struct SceneSpec {
  int width = 640;
  int height = 480;
  std::vector<CableSpec> cables;  // drawn in order; later cables occlude earlier ones
  Background background = Background::uniform;
  Rgb background_color{235, 235, 230};
  Rgb background_alt{200, 200, 195};  // checkerboard / noise partner color
  int checker_px = 24;
  int pixel_noise = 3;  // uniform integer jitter per channel, +/- this amount
  std::uint64_t rng_seed = 1;

  // Throws ErrorCode::invalid_config when a cable leaves the image or is thinner than 3 px.
  void validate() const;
};

struct Scene {
  Image image;
  GroundTruth truth;
  std::vector<std::pair<Point2, Point2>> endpoints;  // per cable
};

// Deterministic for a given SceneSpec: integer-only randomness, fixed sampling density.
Scene generate_scene(const SceneSpec& spec);

// Dense centerline of a Bezier chain (fixed number of samples per segment).
std::vector<Point2> bezier_chain_points(const std::vector<Point2>& control_polygon);

enum class SceneKind { homogeneous, crossing, self_crossing, high_curvature };
const char* to_string(SceneKind kind);
SceneKind scene_kind_from_string(const std::string& name);

// Random scene families used by the test suites:
//  homogeneous     1-3 non-crossing cables, uniform background, widths 8-15 px
//  crossing        two distinctly colored cables crossing once
//  self_crossing   one cable with a single loop crossing itself
//  high_curvature  tight zig-zags violating the smoothness prior (failure-mode fixtures)
SceneSpec random_scene_spec(SceneKind kind, std::uint64_t seed, int width = 640, int height = 480);

nlohmann::json scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const nlohmann::json& doc);

}  // namespace dlo
