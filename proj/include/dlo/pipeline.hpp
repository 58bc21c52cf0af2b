#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlo/eval.hpp"
#include "dlo/graph.hpp"
#include "dlo/model.hpp"
#include "dlo/slic.hpp"
#include "dlo/walker.hpp"

namespace dlo {

struct PipelineConfig {
  SlicParams slic;
  WalkerParams walker;  // walker.graph_order also sets the graph's neighborhood order
  int histogram_bins = 8;
  SplineOptions spline;
  bool verbose = false;
  bool parallel = true;

  // Throws ErrorCode::invalid_config.
  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

nlohmann::json config_to_json(const PipelineConfig& config);
// Missing keys keep their defaults. Throws ErrorCode::invalid_config.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);

struct PipelineOutput {
  SuperpixelMap superpixels;
  RegionGraph graph;
  std::vector<Seed> seeds;
  double termination_radius = 0.0;
  WalkRun walks;
  SegmentationResult segmentation;
  StageTimings timings;
};

// Full run: superpixels, graph, walks between the given seed points, spline masks.
// Throws ErrorCode::insufficient_seeds / invalid_seed / invalid_config.
PipelineOutput run_pipeline(const Image& image, std::span<const Point2> seed_points, const PipelineConfig& config);

// Superpixel and graph stages only (the serve command's session setup).
struct Oversegmentation {
  SuperpixelMap superpixels;
  RegionGraph graph;
};
Oversegmentation oversegment(const Image& image, const PipelineConfig& config);
PipelineOutput run_walk_stage(const Image& image, Oversegmentation stages, std::span<const Point2> seed_points,
                              const PipelineConfig& config);

// Superpixel boundaries drawn over the image.
Image render_boundaries(const Image& image, const SuperpixelMap& map, Rgb color = {255, 255, 0});
// Tinted masks, walk centroid polylines and spline curves drawn over the image.
Image render_overlay(const Image& image, const PipelineOutput& output);

nlohmann::json seeds_to_json(std::span<const Seed> seeds);
// Accepts {"seeds": [[x, y], ...]}, {"seeds": [{"x":..,"y":..}, ...]} or a bare array.
std::vector<Point2> seed_points_from_json(const nlohmann::json& doc);

// Writes walks.json, splines.json, seeds.json, mask_<k>.png, mask_union.png and overlay.png.
// JSON outputs are byte-identical for identical inputs and configuration.
void write_segment_outputs(const std::filesystem::path& dir, const Image& image, const PipelineOutput& output,
                           const PipelineConfig& config);

// Writes a sample in dataset layout (image.png, mask_union.png, mask_<k>.png, spline_<k>.json).
void write_dataset_sample(const std::filesystem::path& dir, const Image& image, const PipelineOutput& output,
                          const PipelineConfig& config);

}  // namespace dlo
