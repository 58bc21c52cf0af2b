#include "dlo/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dlo/image_io.hpp"

namespace dlo {

double iou(const Mask& prediction, const Mask& truth) {
  if (prediction.width() != truth.width() || prediction.height() != truth.height()) {
    fail(ErrorCode::invalid_argument, "mask dimensions differ");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = prediction[i] != 0;
    const bool t = truth[i] != 0;
    inter += (p && t) ? 1 : 0;
    uni += (p || t) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double weighted_iou(std::span<const ImageScore> per_image) {
  require(!per_image.empty(), "weighted IoU of an empty image set");
  double num = 0.0;
  double den = 0.0;
  for (const ImageScore& s : per_image) {
    require(s.cable_count >= 1, "cable count must be at least 1");
    num += s.cable_count * s.iou;
    den += s.cable_count;
  }
  return num / den;
}

EvalReport evaluate_run(std::span<const SegmentationResult> results, std::span<const GroundTruth> truths,
                        std::span<const StageTimings> timings, std::span<const std::string> names) {
  require(results.size() == truths.size(), "results and ground truth are misaligned");
  require(timings.empty() || timings.size() == results.size(), "timings are misaligned");
  require(names.empty() || names.size() == results.size(), "names are misaligned");
  require(!results.empty(), "nothing to evaluate");

  EvalReport report;
  std::vector<ImageScore> scores;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const SegmentationResult& r = results[i];
    const GroundTruth& t = truths[i];
    ImageEvaluation e;
    e.name = names.empty() ? std::to_string(i) : names[i];
    e.cable_count = std::max(1, t.cable_count());
    e.iou = iou(r.union_mask, t.union_mask);
    for (const Mask& cable : t.cable_masks) {
      double best = 0.0;
      for (const Mask& object : r.object_masks) best = std::max(best, iou(object, cable));
      e.per_cable_iou.push_back(best);
    }
    if (!timings.empty()) e.timings = timings[i];
    scores.push_back({e.cable_count, e.iou});
    report.images.push_back(std::move(e));
  }
  report.weighted_iou = weighted_iou(scores);

  StageTimings& m = report.mean_timings;
  for (const ImageEvaluation& e : report.images) {
    m.superpixel_ms += e.timings.superpixel_ms;
    m.graph_ms += e.timings.graph_ms;
    m.walking_ms += e.timings.walking_ms;
    m.spline_ms += e.timings.spline_ms;
    m.iterations += e.timings.iterations;
    m.iteration_ms_total += e.timings.iteration_ms_total;
  }
  const double n = static_cast<double>(report.images.size());
  m.superpixel_ms /= n;
  m.graph_ms /= n;
  m.walking_ms /= n;
  m.spline_ms /= n;
  return report;
}

namespace {
nlohmann::json timings_to_json(const StageTimings& t) {
  return {{"superpixel_ms", t.superpixel_ms}, {"graph_ms", t.graph_ms},
          {"walking_ms", t.walking_ms},       {"spline_ms", t.spline_ms},
          {"total_ms", t.total_ms()},         {"iterations", t.iterations},
          {"mean_iteration_ms", t.mean_iteration_ms()}};
}
}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json images = nlohmann::json::array();
  for (const ImageEvaluation& e : report.images) {
    images.push_back({{"name", e.name},
                      {"cable_count", e.cable_count},
                      {"iou", e.iou},
                      {"per_cable_iou", e.per_cable_iou},
                      {"timings", timings_to_json(e.timings)}});
  }
  return {{"version", 1},
          {"weighted_iou", report.weighted_iou},
          {"mean_timings", timings_to_json(report.mean_timings)},
          {"images", std::move(images)}};
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %6s %8s %10s\n", "image", "cables", "IoU", "total ms");
  out << line;
  for (const ImageEvaluation& e : report.images) {
    std::snprintf(line, sizeof line, "%-24s %6d %8.4f %10.1f\n", e.name.c_str(), e.cable_count, e.iou,
                  e.timings.total_ms());
    out << line;
  }
  std::snprintf(line, sizeof line, "weighted IoU %.4f over %zu images; mean iteration %.4f ms\n", report.weighted_iou,
                report.images.size(), report.mean_timings.mean_iteration_ms());
  out << line;
  return out.str();
}

void write_sample(const std::filesystem::path& dir, const Image& image, const GroundTruth& truth) {
  std::filesystem::create_directories(dir);
  write_png(dir / "image.png", image);
  write_mask_png(dir / "mask_union.png", truth.union_mask);
  for (std::size_t k = 0; k < truth.cable_masks.size(); ++k) {
    write_mask_png(dir / ("mask_" + std::to_string(k) + ".png"), truth.cable_masks[k]);
    nlohmann::json points = nlohmann::json::array();
    if (k < truth.cable_points.size()) {
      for (const Point2& p : truth.cable_points[k]) points.push_back({p.x, p.y});
    }
    std::ofstream out(dir / ("spline_" + std::to_string(k) + ".json"));
    out << nlohmann::json{{"version", 1}, {"points", std::move(points)}}.dump(1) << '\n';
    if (!out) fail(ErrorCode::io, "cannot write spline file in " + dir.string());
  }
}

GroundTruth read_truth(const std::filesystem::path& dir) {
  GroundTruth truth;
  for (int k = 0;; ++k) {
    const auto mask_path = dir / ("mask_" + std::to_string(k) + ".png");
    if (!std::filesystem::exists(mask_path)) break;
    truth.cable_masks.push_back(read_mask(mask_path));
    std::vector<Point2> points;
    const auto spline_path = dir / ("spline_" + std::to_string(k) + ".json");
    if (std::filesystem::exists(spline_path)) {
      std::ifstream in(spline_path);
      try {
        const nlohmann::json doc = nlohmann::json::parse(in);
        const nlohmann::json& list = doc.is_array() ? doc : doc.at("points");
        for (const auto& p : list) points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::invalid_argument, "malformed " + spline_path.string() + ": " + e.what());
      }
    }
    truth.cable_points.push_back(std::move(points));
  }
  const auto union_path = dir / "mask_union.png";
  if (std::filesystem::exists(union_path)) {
    truth.union_mask = read_mask(union_path);
  } else {
    require(!truth.cable_masks.empty(), "sample " + dir.string() + " has no masks");
    truth.union_mask =
        mask_union(truth.cable_masks, truth.cable_masks.front().width(), truth.cable_masks.front().height());
  }
  return truth;
}

std::vector<std::filesystem::path> list_samples(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> out;
  if (std::filesystem::exists(root / "image.png")) out.push_back(root);
  if (std::filesystem::is_directory(root)) {
    for (const auto& entry : std::filesystem::directory_iterator(root)) {
      if (entry.is_directory() && std::filesystem::exists(entry.path() / "image.png")) out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Point2> truth_endpoints(const GroundTruth& truth) {
  std::vector<Point2> out;
  for (const auto& points : truth.cable_points) {
    if (points.size() < 2) continue;
    out.push_back(points.front());
    out.push_back(points.back());
  }
  return out;
}

}  // namespace dlo
