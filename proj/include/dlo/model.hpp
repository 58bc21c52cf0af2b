#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlo/geometry.hpp"
#include "dlo/graph.hpp"
#include "dlo/image.hpp"
#include "dlo/kernels.hpp"
#include "dlo/walker.hpp"

namespace dlo {

// Clamped B-spline curve over the parameter range [0, 1].
struct SplineModel {
  int degree = 3;
  std::vector<double> knots;
  std::vector<Point2> control_points;
  double thickness_px = 1.0;
  Rgb color;
};

// Removes consecutive repeats (self-crossing walks revisit superpixels).
std::vector<Point2> collapse_consecutive_duplicates(std::span<const Point2> points);

// Cumulative chord length normalized to [0, 1]. Points must be consecutively distinct.
std::vector<double> chord_length_parameters(std::span<const Point2> points);

// Least-squares clamped B-spline through chord-length parameters with
// min(floor(sqrt(n)), n - degree - 1) uniform interior knots. The first and
// last data points are interpolated exactly.
SplineModel fit_spline(std::span<const Point2> points, int degree = 3);

// de Boor evaluation; t is clamped to [0, 1].
Point2 evaluate_spline(const SplineModel& model, double t);

// Dense samples from t = 0 to t = 1 with consecutive gaps <= max_gap_px.
std::vector<Point2> sample_spline(const SplineModel& model, double max_gap_px = 1.0);

double polyline_length(std::span<const Point2> polyline);

enum class ThicknessStrategy {
  equivalent_side,  // mean of sqrt(area) over the walk's superpixels
  area_per_length,  // total area of the gap-filled walk superpixels divided by curve length
};
const char* to_string(ThicknessStrategy strategy);
ThicknessStrategy thickness_strategy_from_string(const std::string& name);

// Walk vertices with the superpixels between consecutive vertices filled in:
// each jump is replaced by a shortest graph path, stepping at every hop to the
// neighbor nearest the straight segment between the two walk vertices.
std::vector<int> fill_walk_gaps(const Walk& walk, const RegionGraph& graph);

// Mean of sqrt(area) over the distinct superpixels of the walk, at least 1 px.
double estimate_thickness(const Walk& walk, const RegionGraph& graph);
double estimate_thickness(const Walk& walk, const RegionGraph& graph, ThicknessStrategy strategy,
                          double curve_length_px);

// Pixels whose center lies within thickness/2 of the dense sample polyline.
Mask render_mask(const SplineModel& model, int width, int height, double max_gap_px = 1.0,
                 kernels::Backend backend = kernels::Backend::parallel);
Mask render_polyline(std::span<const Point2> polyline, double thickness_px, int width, int height,
                     kernels::Backend backend = kernels::Backend::parallel);

struct SplineOptions {
  int degree = 3;
  double sample_gap_px = 1.0;
  ThicknessStrategy thickness = ThicknessStrategy::area_per_length;
  // Pin the curve ends to the seeds' source points instead of stopping at
  // the first/last superpixel centroid.
  bool anchor_endpoints = true;

  friend bool operator==(const SplineOptions&, const SplineOptions&) = default;
};

// Fit for one closed walk; `seeds` supplies the endpoint anchors.
SplineModel model_walk(const Walk& walk, const RegionGraph& graph, std::span<const Seed> seeds,
                       const SplineOptions& options);

struct SegmentationResult {
  int width = 0;
  int height = 0;
  std::vector<int> walk_ids;
  std::vector<SplineModel> splines;
  std::vector<Mask> object_masks;
  Mask union_mask;

  // 0 = background, k + 1 = object k; later objects win on overlap.
  LabelField label_image() const;
};

SegmentationResult segment_walks(std::span<const Walk> walks, const RegionGraph& graph, std::span<const Seed> seeds,
                                 const SplineOptions& options, int width, int height,
                                 kernels::Backend backend = kernels::Backend::parallel);

nlohmann::json spline_to_json(const SplineModel& model, double sample_gap_px = 1.0);
nlohmann::json splines_to_json(std::span<const SplineModel> models, double sample_gap_px = 1.0);
SplineModel spline_from_json(const nlohmann::json& doc);

}  // namespace dlo
