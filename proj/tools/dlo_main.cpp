#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlo/error.hpp"
#include "dlo/image_io.hpp"
#include "dlo/pipeline.hpp"
#include "dlo/server.hpp"
#include "dlo/synth.hpp"

namespace {

using namespace dlo;

constexpr int kExitUsage = 1;

Point2 parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) fail(ErrorCode::invalid_seed, "seed '" + text + "' is not of the form x,y");
  try {
    std::size_t used_x = 0, used_y = 0;
    const std::string xs = text.substr(0, comma), ys = text.substr(comma + 1);
    const double x = std::stod(xs, &used_x);
    const double y = std::stod(ys, &used_y);
    if (used_x != xs.size() || used_y != ys.size()) throw std::invalid_argument(text);
    return {x, y};
  } catch (const std::logic_error&) {
    fail(ErrorCode::invalid_seed, "seed '" + text + "' is not of the form x,y");
  }
}

nlohmann::json read_json(const std::filesystem::path& path, ErrorCode code) {
  std::ifstream in(path);
  if (!in) fail(code, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(code, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
}

// Flags shared by segment, evaluate and serve; explicit flags override the config file.
struct ConfigFlags {
  std::string config_path;
  int superpixels = 0;
  double compactness = 0, vm_m = 0, c_visual = 0, c_distance = 0, radius = 0;
  int bins = 0, order = 0, max_steps = 0;
  bool verbose = false, serial = false;
  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> overrides;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    add(app.add_option("--superpixels", superpixels, "Target superpixel count K (0: W*H/300)"),
        [this](PipelineConfig& c) { c.slic.region_count = superpixels; });
    add(app.add_option("--compactness", compactness, "SLIC compactness"),
        [this](PipelineConfig& c) { c.slic.compactness = compactness; });
    add(app.add_option("--bins", bins, "HSV histogram bins per channel"),
        [this](PipelineConfig& c) { c.histogram_bins = bins; });
    add(app.add_option("--order", order, "Neighborhood order d"),
        [this](PipelineConfig& c) { c.walker.graph_order = order; });
    add(app.add_option("--vm-m", vm_m, "von Mises concentration"),
        [this](PipelineConfig& c) { c.walker.von_mises_m = vm_m; });
    add(app.add_option("--c-visual", c_visual, "Bradford shape of the visual term"),
        [this](PipelineConfig& c) { c.walker.c_visual = c_visual; });
    add(app.add_option("--c-distance", c_distance, "Bradford shape of the distance term"),
        [this](PipelineConfig& c) { c.walker.c_distance = c_distance; });
    add(app.add_option("--radius", radius, "Closing radius in pixels (0: twice the grid interval)"),
        [this](PipelineConfig& c) { c.walker.termination_radius_px = radius; });
    add(app.add_option("--max-steps", max_steps, "Step cap per walk"),
        [this](PipelineConfig& c) { c.walker.max_steps = max_steps; });
    add(app.add_flag("--verbose", verbose, "Write per-step scores and superpixel images"),
        [this](PipelineConfig& c) { c.verbose = verbose; });
    add(app.add_flag("--serial", serial, "Disable OpenMP kernels"), [this](PipelineConfig& c) { c.parallel = !serial; });
  }

  void add(CLI::Option* opt, std::function<void(PipelineConfig&)> apply) { overrides.emplace_back(opt, std::move(apply)); }

  PipelineConfig resolve() const {
    PipelineConfig config = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    for (const auto& [opt, apply] : overrides) {
      if (opt->count() > 0) apply(config);
    }
    config.validate();
    return config;
  }
};

int cmd_segment(const std::string& image_path, const std::vector<std::string>& seed_flags,
                const std::string& seeds_path, const std::string& out_dir, const ConfigFlags& flags) {
  const PipelineConfig config = flags.resolve();
  const Image image = read_image(image_path);
  std::vector<Point2> seeds;
  if (!seeds_path.empty()) seeds = seed_points_from_json(read_json(seeds_path, ErrorCode::invalid_seed));
  for (const std::string& s : seed_flags) seeds.push_back(parse_point(s));

  const PipelineOutput output = run_pipeline(image, seeds, config);
  write_segment_outputs(out_dir, image, output, config);
  if (config.verbose) {
    const StageTimings& t = output.timings;
    std::fprintf(stderr, "superpixels %.1f ms, graph %.1f ms, walks %.1f ms, splines %.1f ms (%lld steps)\n",
                 t.superpixel_ms, t.graph_ms, t.walking_ms, t.spline_ms, t.iterations);
  }
  for (int seed : output.walks.seeds_without_closed_walk) {
    std::fprintf(stderr, "warning: no walk from seed %d closed\n", seed);
  }
  if (output.walks.surviving.empty()) fail(ErrorCode::no_walk_closed, "no walk closed between any pair of seeds");
  std::printf("%zu object(s) written to %s\n", output.segmentation.splines.size(), out_dir.c_str());
  return 0;
}

int cmd_evaluate(const std::string& dataset, const std::string& out_dir, const ConfigFlags& flags) {
  const PipelineConfig config = flags.resolve();
  const auto samples = list_samples(dataset);
  if (samples.empty()) fail(ErrorCode::invalid_argument, "no samples under " + dataset);

  std::vector<SegmentationResult> results;
  std::vector<GroundTruth> truths;
  std::vector<StageTimings> timings;
  std::vector<std::string> names;
  for (const auto& dir : samples) {
    const Image image = read_image(dir / "image.png");
    GroundTruth truth = read_truth(dir);
    const std::vector<Point2> seeds = std::filesystem::exists(dir / "seeds.json")
                                          ? seed_points_from_json(read_json(dir / "seeds.json", ErrorCode::invalid_seed))
                                          : truth_endpoints(truth);
    PipelineOutput output = run_pipeline(image, seeds, config);
    results.push_back(std::move(output.segmentation));
    timings.push_back(output.timings);
    truths.push_back(std::move(truth));
    names.push_back(dir.filename().string());
  }
  const EvalReport report = evaluate_run(results, truths, timings, names);
  const std::string table = report_table(report);
  std::fputs(table.c_str(), stdout);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_text(std::filesystem::path(out_dir) / "report.json", report_to_json(report).dump(1) + "\n");
    write_text(std::filesystem::path(out_dir) / "report.txt", table);
  }
  return 0;
}

int cmd_synth(const std::string& kind, int count, std::uint64_t seed, const std::string& spec_path,
              const std::string& out_dir) {
  std::vector<SceneSpec> specs;
  if (!spec_path.empty()) {
    const nlohmann::json doc = read_json(spec_path, ErrorCode::invalid_config);
    if (doc.is_array()) {
      for (const auto& d : doc) specs.push_back(scene_spec_from_json(d));
    } else {
      specs.push_back(scene_spec_from_json(doc));
    }
  } else {
    const SceneKind k = scene_kind_from_string(kind);
    for (int i = 0; i < count; ++i) specs.push_back(random_scene_spec(k, seed + static_cast<std::uint64_t>(i)));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%04zu", i);
    const std::filesystem::path dir = std::filesystem::path(out_dir) / name;
    const Scene scene = generate_scene(specs[i]);
    write_sample(dir, scene.image, scene.truth);
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& [a, b] : scene.endpoints) {
      seeds.push_back({a.x, a.y});
      seeds.push_back({b.x, b.y});
    }
    write_text(dir / "seeds.json", nlohmann::json{{"version", 1}, {"seeds", std::move(seeds)}}.dump(1) + "\n");
    write_text(dir / "scene.json", scene_spec_to_json(specs[i]).dump(1) + "\n");
  }
  std::printf("%zu sample(s) written to %s\n", specs.size(), out_dir.c_str());
  return 0;
}

int cmd_serve(const std::string& host, int port, const std::string& dataset_root, const ConfigFlags& flags) {
  AnnotationServer server(flags.resolve(), dataset_root);
  const int bound = server.bind(host, port);
  if (bound < 0) fail(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  std::printf("listening on http://%s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  return server.serve() ? 0 : static_cast<int>(ErrorCode::io);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformable linear object segmentation by random walks over superpixels"};
  app.require_subcommand(1);

  auto* segment = app.add_subcommand("segment", "Segment cables between seed points in one image");
  std::string image_path, seeds_path, out_dir = "out";
  std::vector<std::string> seed_flags;
  ConfigFlags segment_flags;
  segment->add_option("image", image_path, "Input image")->required();
  segment->add_option("--seed", seed_flags, "Seed point x,y (repeatable)");
  segment->add_option("--seeds", seeds_path, "JSON seed list");
  segment->add_option("--out", out_dir, "Output directory");
  segment_flags.attach(*segment);

  auto* evaluate = app.add_subcommand("evaluate", "Run the pipeline over a dataset and score it against ground truth");
  std::string dataset, eval_out;
  ConfigFlags eval_flags;
  evaluate->add_option("dataset", dataset, "Dataset directory")->required();
  evaluate->add_option("--out", eval_out, "Directory for report.json and report.txt");
  eval_flags.attach(*evaluate);

  auto* synth = app.add_subcommand("synth", "Generate synthetic scenes in dataset layout");
  std::string kind = "homogeneous", spec_path, synth_out = "synthetic";
  int count = 10;
  std::uint64_t rng_seed = 1;
  synth->add_option("--kind", kind, "homogeneous, crossing, self_crossing or high_curvature");
  synth->add_option("--count", count, "Number of scenes")->check(CLI::PositiveNumber);
  synth->add_option("--seed", rng_seed, "First RNG seed; scene i uses seed + i");
  synth->add_option("--spec", spec_path, "Scene spec JSON (object or array) instead of random scenes");
  synth->add_option("--out", synth_out, "Output directory");

  auto* serve = app.add_subcommand("serve", "Serve the labeling HTTP API");
  std::string host = "127.0.0.1", dataset_root = "accepted";
  int port = 8080;
  ConfigFlags serve_flags;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--dataset", dataset_root, "Directory for accepted samples");
  serve_flags.attach(*serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*segment) return cmd_segment(image_path, seed_flags, seeds_path, out_dir, segment_flags);
    if (*evaluate) return cmd_evaluate(dataset, eval_out, eval_flags);
    if (*synth) return cmd_synth(kind, count, rng_seed, spec_path, synth_out);
    if (*serve) return cmd_serve(host, port, dataset_root, serve_flags);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(ErrorCode::io);
  }
  return kExitUsage;
}
