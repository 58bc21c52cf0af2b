#include "dlo/pipeline.hpp"

#include <chrono>
#include <fstream>

#include "dlo/image_io.hpp"

namespace dlo {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

kernels::Backend backend_of(const PipelineConfig& c) {
  return c.parallel ? kernels::Backend::parallel : kernels::Backend::serial;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) fail(ErrorCode::io, "write failed: " + path.string());
}

}  // namespace

// Beyond a few hops the candidate set spans most of the image.
constexpr int kMaxGraphOrder = 6;

void PipelineConfig::validate() const {
  if (slic.region_count < 0) fail(ErrorCode::invalid_config, "superpixel count must be non-negative");
  if (slic.region_count == 1) fail(ErrorCode::invalid_config, "superpixel count must be at least 2");
  if (!(slic.compactness > 0.0)) fail(ErrorCode::invalid_config, "compactness must be positive");
  if (slic.max_iterations < 1) fail(ErrorCode::invalid_config, "max_iterations must be at least 1");
  if (histogram_bins < 2 || histogram_bins > 40) fail(ErrorCode::invalid_config, "histogram bins must lie in [2, 40]");
  if (walker.graph_order > kMaxGraphOrder) fail(ErrorCode::invalid_config, "graph order must be at most 6");
  walker.validate(walker.graph_order);
  if (spline.degree < 1 || spline.degree > 5) fail(ErrorCode::invalid_config, "spline degree must lie in [1, 5]");
  if (!(spline.sample_gap_px > 0.0)) fail(ErrorCode::invalid_config, "sample gap must be positive");
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  return {{"version", 1},
          {"superpixels",
           {{"region_count", c.slic.region_count},
            {"compactness", c.slic.compactness},
            {"max_iterations", c.slic.max_iterations},
            {"min_region_fraction", c.slic.min_region_fraction}}},
          {"histogram_bins", c.histogram_bins},
          {"walker",
           {{"c_visual", c.walker.c_visual},
            {"c_distance", c.walker.c_distance},
            {"von_mises_m", c.walker.von_mises_m},
            {"graph_order", c.walker.graph_order},
            {"max_steps", c.walker.max_steps},
            {"termination_radius_px", c.walker.termination_radius_px},
            {"min_step_likelihood", c.walker.min_step_likelihood},
            {"backtrack_window", c.walker.backtrack_window},
            {"appearance_weight", c.walker.appearance_weight}}},
          {"spline",
           {{"degree", c.spline.degree},
            {"sample_gap_px", c.spline.sample_gap_px},
            {"thickness", to_string(c.spline.thickness)},
            {"anchor_endpoints", c.spline.anchor_endpoints}}},
          {"verbose", c.verbose},
          {"parallel", c.parallel}};
}

PipelineConfig config_from_json(const nlohmann::json& doc) {
  PipelineConfig c;
  try {
    if (!doc.is_object()) fail(ErrorCode::invalid_config, "config must be a JSON object");
    if (doc.value("version", 1) != 1) fail(ErrorCode::invalid_config, "unsupported config version");
    if (doc.contains("superpixels")) {
      const auto& s = doc.at("superpixels");
      c.slic.region_count = s.value("region_count", c.slic.region_count);
      c.slic.compactness = s.value("compactness", c.slic.compactness);
      c.slic.max_iterations = s.value("max_iterations", c.slic.max_iterations);
      c.slic.min_region_fraction = s.value("min_region_fraction", c.slic.min_region_fraction);
    }
    c.histogram_bins = doc.value("histogram_bins", c.histogram_bins);
    if (doc.contains("walker")) {
      const auto& w = doc.at("walker");
      c.walker.c_visual = w.value("c_visual", c.walker.c_visual);
      c.walker.c_distance = w.value("c_distance", c.walker.c_distance);
      c.walker.von_mises_m = w.value("von_mises_m", c.walker.von_mises_m);
      c.walker.graph_order = w.value("graph_order", c.walker.graph_order);
      c.walker.max_steps = w.value("max_steps", c.walker.max_steps);
      c.walker.termination_radius_px = w.value("termination_radius_px", c.walker.termination_radius_px);
      c.walker.min_step_likelihood = w.value("min_step_likelihood", c.walker.min_step_likelihood);
      c.walker.backtrack_window = w.value("backtrack_window", c.walker.backtrack_window);
      c.walker.appearance_weight = w.value("appearance_weight", c.walker.appearance_weight);
    }
    if (doc.contains("spline")) {
      const auto& s = doc.at("spline");
      c.spline.degree = s.value("degree", c.spline.degree);
      c.spline.sample_gap_px = s.value("sample_gap_px", c.spline.sample_gap_px);
      c.spline.thickness = thickness_strategy_from_string(s.value("thickness", std::string(to_string(c.spline.thickness))));
      c.spline.anchor_endpoints = s.value("anchor_endpoints", c.spline.anchor_endpoints);
    }
    c.verbose = doc.value("verbose", c.verbose);
    c.parallel = doc.value("parallel", c.parallel);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_config, std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::invalid_config, "cannot read config " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
}

Oversegmentation oversegment(const Image& image, const PipelineConfig& config) {
  config.validate();
  Oversegmentation out;
  out.superpixels = slic_segment(image, config.slic, backend_of(config));
  out.graph = build_graph(image, out.superpixels, config.histogram_bins, config.walker.graph_order, backend_of(config));
  return out;
}

PipelineOutput run_walk_stage(const Image& image, Oversegmentation stages, std::span<const Point2> seed_points,
                              const PipelineConfig& config) {
  if (seed_points.size() < 2) fail(ErrorCode::insufficient_seeds, "at least two seeds are required");
  PipelineOutput out;
  out.superpixels = std::move(stages.superpixels);
  out.graph = std::move(stages.graph);
  std::vector<int> seed_vertices;
  for (std::size_t i = 0; i < seed_points.size(); ++i) {
    out.seeds.push_back(make_seed(static_cast<int>(i), out.superpixels, seed_points[i]));
    seed_vertices.push_back(out.seeds.back().vertex_id);
  }
  out.graph.set_seed_flags(seed_vertices);
  out.termination_radius = config.walker.resolve_radius(out.superpixels.grid_interval);

  auto t0 = Clock::now();
  WalkRunOptions options;
  options.record_scores = config.verbose;
  options.parallel = config.parallel;
  out.walks = run_walks(out.graph, out.seeds, config.walker, out.termination_radius, options);
  out.timings.walking_ms = ms_since(t0);
  out.timings.iterations = out.walks.extension_steps;
  out.timings.iteration_ms_total = 1000.0 * out.walks.extension_seconds;

  t0 = Clock::now();
  out.segmentation = segment_walks(out.walks.surviving, out.graph, out.seeds, config.spline, image.width(),
                                   image.height(), backend_of(config));
  out.timings.spline_ms = ms_since(t0);
  return out;
}

PipelineOutput run_pipeline(const Image& image, std::span<const Point2> seed_points, const PipelineConfig& config) {
  config.validate();
  if (image.empty()) fail(ErrorCode::bad_image, "empty image");
  if (seed_points.size() < 2) fail(ErrorCode::insufficient_seeds, "at least two seeds are required");
  for (const Point2& p : seed_points) {
    if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= image.width() - 1 && p.y <= image.height() - 1)) {
      fail(ErrorCode::invalid_seed,
           "seed (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") lies outside the image");
    }
  }

  Oversegmentation stages;
  auto t0 = Clock::now();
  stages.superpixels = slic_segment(image, config.slic, backend_of(config));
  const double superpixel_ms = ms_since(t0);
  t0 = Clock::now();
  stages.graph =
      build_graph(image, stages.superpixels, config.histogram_bins, config.walker.graph_order, backend_of(config));
  const double graph_ms = ms_since(t0);

  PipelineOutput out = run_walk_stage(image, std::move(stages), seed_points, config);
  out.timings.superpixel_ms = superpixel_ms;
  out.timings.graph_ms = graph_ms;
  return out;
}

Image render_boundaries(const Image& image, const SuperpixelMap& map, Rgb color) {
  Image out = image;
  const LabelField& l = map.labels;
  for (int y = 0; y < l.height(); ++y) {
    for (int x = 0; x < l.width(); ++x) {
      const bool edge = (x + 1 < l.width() && l(x, y) != l(x + 1, y)) || (y + 1 < l.height() && l(x, y) != l(x, y + 1));
      if (edge) out.set(x, y, color);
    }
  }
  return out;
}

Image render_overlay(const Image& image, const PipelineOutput& output) {
  Image out = image;
  const SegmentationResult& seg = output.segmentation;
  const auto paint = [&](const Mask& mask, Rgb c, int alpha) {
    for (int y = 0; y < mask.height(); ++y) {
      for (int x = 0; x < mask.width(); ++x) {
        if (!mask(x, y)) continue;
        const Rgb o = out.at(x, y);
        const auto mix = [alpha](int a, int b) { return static_cast<std::uint8_t>((a * (255 - alpha) + b * alpha) / 255); };
        out.set(x, y, {mix(o.r, c.r), mix(o.g, c.g), mix(o.b, c.b)});
      }
    }
  };
  for (std::size_t k = 0; k < seg.object_masks.size(); ++k) {
    const Rgb c = seg.splines[k].color;
    paint(seg.object_masks[k], {static_cast<std::uint8_t>(255 - c.r), static_cast<std::uint8_t>(255 - c.g),
                                static_cast<std::uint8_t>(255 - c.b)}, 110);
    const std::vector<Point2> curve = sample_spline(seg.splines[k]);
    paint(render_polyline(curve, 2.0, out.width(), out.height()), {0, 0, 0}, 255);
  }
  for (const Walk& w : output.walks.surviving) {
    std::vector<Point2> polyline;
    for (int v : w.vertices) polyline.push_back(output.graph.vertex(v).centroid);
    paint(render_polyline(polyline, 1.0, out.width(), out.height()), {255, 255, 255}, 200);
    for (const Point2& p : polyline) {
      const Point2 dot_at[] = {p};
      paint(render_polyline(dot_at, 5.0, out.width(), out.height()), {255, 255, 255}, 255);
    }
  }
  for (const Seed& s : output.seeds) {
    const Point2 at[] = {s.source_point};
    paint(render_polyline(at, 9.0, out.width(), out.height()), {255, 0, 255}, 255);
  }
  return out;
}

nlohmann::json seeds_to_json(std::span<const Seed> seeds) {
  nlohmann::json list = nlohmann::json::array();
  for (const Seed& s : seeds) {
    list.push_back({{"id", s.id}, {"vertex_id", s.vertex_id}, {"x", s.source_point.x}, {"y", s.source_point.y}});
  }
  return {{"version", 1}, {"seeds", std::move(list)}};
}

std::vector<Point2> seed_points_from_json(const nlohmann::json& doc) {
  try {
    const nlohmann::json& list = doc.is_array() ? doc : doc.at("seeds");
    std::vector<Point2> out;
    for (const auto& s : list) {
      if (s.is_array()) {
        out.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
      } else {
        out.push_back({s.at("x").get<double>(), s.at("y").get<double>()});
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_seed, std::string("malformed seed list: ") + e.what());
  }
}

void write_segment_outputs(const std::filesystem::path& dir, const Image& image, const PipelineOutput& output,
                           const PipelineConfig& config) {
  std::filesystem::create_directories(dir);
  write_json(dir / "walks.json", walks_to_json(output.walks.surviving, output.graph, config.walker, config.verbose));
  write_json(dir / "splines.json", splines_to_json(output.segmentation.splines, config.spline.sample_gap_px));
  write_json(dir / "seeds.json", seeds_to_json(output.seeds));
  for (std::size_t k = 0; k < output.segmentation.object_masks.size(); ++k) {
    write_mask_png(dir / ("mask_" + std::to_string(k) + ".png"), output.segmentation.object_masks[k]);
  }
  write_mask_png(dir / "mask_union.png", output.segmentation.union_mask);
  write_png(dir / "overlay.png", render_overlay(image, output));
  if (config.verbose) {
    write_label_png(dir / "superpixels.png", output.superpixels.labels);
    write_png(dir / "boundaries.png", render_boundaries(image, output.superpixels));
  }
}

void write_dataset_sample(const std::filesystem::path& dir, const Image& image, const PipelineOutput& output,
                          const PipelineConfig& config) {
  std::filesystem::create_directories(dir);
  write_png(dir / "image.png", image);
  const SegmentationResult& seg = output.segmentation;
  write_mask_png(dir / "mask_union.png", seg.union_mask);
  for (std::size_t k = 0; k < seg.object_masks.size(); ++k) {
    write_mask_png(dir / ("mask_" + std::to_string(k) + ".png"), seg.object_masks[k]);
    write_json(dir / ("spline_" + std::to_string(k) + ".json"), spline_to_json(seg.splines[k], config.spline.sample_gap_px));
  }
}

}  // namespace dlo
