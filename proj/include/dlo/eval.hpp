#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlo/geometry.hpp"
#include "dlo/image.hpp"
#include "dlo/model.hpp"

namespace dlo {

// |prediction & truth| / |prediction | truth|; 1 when both are empty.
double iou(const Mask& prediction, const Mask& truth);

struct ImageScore {
  int cable_count = 1;
  double iou = 0.0;
};

// sum_i C_i IoU_i / sum_i C_i.
double weighted_iou(std::span<const ImageScore> per_image);

struct GroundTruth {
  std::vector<Mask> cable_masks;
  Mask union_mask;
  std::vector<std::vector<Point2>> cable_points;  // centerline discretization per cable

  int cable_count() const { return static_cast<int>(cable_masks.size()); }
};

struct StageTimings {
  double superpixel_ms = 0.0;
  double graph_ms = 0.0;
  double walking_ms = 0.0;
  double spline_ms = 0.0;
  long long iterations = 0;  // walk extension steps
  double iteration_ms_total = 0.0;

  double total_ms() const { return superpixel_ms + graph_ms + walking_ms + spline_ms; }
  double mean_iteration_ms() const { return iterations > 0 ? iteration_ms_total / iterations : 0.0; }
};

struct ImageEvaluation {
  std::string name;
  int cable_count = 0;
  double iou = 0.0;                  // union mask vs union mask
  std::vector<double> per_cable_iou;  // best-matching predicted object per cable
  StageTimings timings;
};

struct EvalReport {
  std::vector<ImageEvaluation> images;
  double weighted_iou = 0.0;
  StageTimings mean_timings;
};

// `timings` and `names` may be empty; otherwise they must align with the results.
EvalReport evaluate_run(std::span<const SegmentationResult> results, std::span<const GroundTruth> truths,
                        std::span<const StageTimings> timings = {}, std::span<const std::string> names = {});

nlohmann::json report_to_json(const EvalReport& report);
std::string report_table(const EvalReport& report);

// Dataset layout, one directory per image:
//   image.png, mask_union.png, mask_<k>.png, spline_<k>.json ({"points": [[x, y], ...]})
void write_sample(const std::filesystem::path& dir, const Image& image, const GroundTruth& truth);
GroundTruth read_truth(const std::filesystem::path& dir);
// Sample directories (those holding image.png) under `root`, sorted by name.
std::vector<std::filesystem::path> list_samples(const std::filesystem::path& root);
// Cable endpoints taken from the first and last spline point of each cable.
std::vector<Point2> truth_endpoints(const GroundTruth& truth);

}  // namespace dlo
