#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "dlo/error.hpp"
#include "dlo/image_io.hpp"
#include "dlo/pipeline.hpp"
#include "dlo/synth.hpp"

namespace dlo {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dlo::Error thrown";
  return ErrorCode::invalid_argument;
}

Scene straight_scene() {
  SceneSpec spec;
  spec.cables.push_back({{{110, 250.5}, {240, 230}, {390, 260}, {520, 240.5}}, 11.0, {200, 40, 40}});
  return generate_scene(spec);
}

std::vector<Point2> endpoints(const Scene& s) {
  std::vector<Point2> pts;
  for (const auto& [a, b] : s.endpoints) pts.push_back(a), pts.push_back(b);
  return pts;
}

TEST(Config, JsonRoundTripAndDefaults) {
  PipelineConfig c;
  c.slic.region_count = 900;
  c.slic.compactness = 15.0;
  c.walker.graph_order = 2;
  c.walker.von_mises_m = 6.5;
  c.walker.appearance_weight = 0.0;
  c.histogram_bins = 6;
  c.spline.thickness = ThicknessStrategy::equivalent_side;
  c.spline.anchor_endpoints = false;
  c.verbose = true;
  EXPECT_EQ(config_from_json(nlohmann::json::parse(config_to_json(c).dump())), c);
  EXPECT_EQ(config_from_json(nlohmann::json::object()), PipelineConfig{});
  const PipelineConfig partial = config_from_json({{"walker", {{"max_steps", 50}}}});
  EXPECT_EQ(partial.walker.max_steps, 50);
  EXPECT_EQ(partial.walker.c_visual, PipelineConfig{}.walker.c_visual);
}

TEST(Config, InvalidValuesAreRejected) {
  const nlohmann::json bad[] = {
      {{"histogram_bins", 1}},
      {{"superpixels", {{"compactness", 0.0}}}},
      {{"superpixels", {{"region_count", 1}}}},
      {{"walker", {{"graph_order", 0}}}},
      {{"walker", {{"graph_order", 7}}}},
      {{"walker", {{"appearance_weight", -1.0}}}},
      {{"walker", {{"von_mises_m", "four"}}}},
      {{"spline", {{"thickness", "median"}}}},
      {{"spline", {{"degree", 7}}}},
  };
  for (const nlohmann::json& doc : bad) EXPECT_EQ(code_of([&] { config_from_json(doc); }), ErrorCode::invalid_config) << doc;
  const fs::path p = fs::temp_directory_path() / "dlo_bad_config.json";
  std::ofstream(p) << "{ not json";
  EXPECT_EQ(code_of([&] { load_config(p); }), ErrorCode::invalid_config);
  fs::remove(p);
}

TEST(Seeds, AcceptedJsonShapes) {
  const std::vector<Point2> want{{1, 2}, {3.5, 4}};
  EXPECT_EQ(seed_points_from_json(nlohmann::json::parse(R"({"seeds": [[1, 2], [3.5, 4]]})")), want);
  EXPECT_EQ(seed_points_from_json(nlohmann::json::parse(R"({"seeds": [{"x": 1, "y": 2}, {"x": 3.5, "y": 4}]})")), want);
  EXPECT_EQ(seed_points_from_json(nlohmann::json::parse("[[1, 2], [3.5, 4]]")), want);
  EXPECT_THROW(seed_points_from_json(nlohmann::json::parse(R"({"seeds": 3})")), Error);
}

TEST(Pipeline, InputErrors) {
  const Scene s = straight_scene();
  const PipelineConfig c;
  const Point2 one[] = {{110, 250}};
  const Point2 outside[] = {{110, 250}, {700, 10}};
  EXPECT_EQ(code_of([&] { run_pipeline(s.image, one, c); }), ErrorCode::insufficient_seeds);
  EXPECT_EQ(code_of([&] { run_pipeline(s.image, outside, c); }), ErrorCode::invalid_seed);
  EXPECT_EQ(code_of([&] { run_pipeline(Image(), endpoints(s), c); }), ErrorCode::bad_image);
  PipelineConfig bad;
  bad.walker.graph_order = 9;
  EXPECT_EQ(code_of([&] { run_pipeline(s.image, endpoints(s), bad); }), ErrorCode::invalid_config);
}

TEST(Pipeline, SegmentsAStraightCable) {
  const Scene s = straight_scene();
  const PipelineOutput out = run_pipeline(s.image, endpoints(s), PipelineConfig{});
  ASSERT_EQ(out.segmentation.object_masks.size(), 1u);
  EXPECT_GE(iou(out.segmentation.union_mask, s.truth.union_mask), 0.7);
  EXPECT_GT(out.timings.iterations, 0);
  EXPECT_GT(out.timings.total_ms(), 0.0);
}

// RMS distance between a walk's centroids and a spline fitted to them stays
// below the superpixel grid interval.
TEST(Pipeline, FitResidualWithinGridInterval) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Scene s = generate_scene(random_scene_spec(SceneKind::homogeneous, seed));
    const PipelineOutput out = run_pipeline(s.image, endpoints(s), PipelineConfig{});
    for (const Walk& w : out.walks.surviving) {
      std::vector<Point2> pts;
      for (int v : w.vertices) pts.push_back(out.graph.vertex(v).centroid);
      pts = collapse_consecutive_duplicates(pts);
      if (pts.size() < 4) continue;
      const SplineModel m = fit_spline(pts);
      const std::vector<double> t = chord_length_parameters(pts);
      double sq = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Point2 d = evaluate_spline(m, t[i]) - pts[i];
        sq += dot(d, d);
      }
      EXPECT_LE(std::sqrt(sq / pts.size()), out.superpixels.grid_interval) << seed;
    }
  }
}

TEST(Pipeline, OutputsAreDeterministicAndBackendIndependent) {
  const Scene s = generate_scene(random_scene_spec(SceneKind::crossing, 7));
  PipelineConfig parallel, serial;
  serial.parallel = false;
  const fs::path root = fs::temp_directory_path() / "dlo_test_segment";
  fs::remove_all(root);
  const PipelineOutput a = run_pipeline(s.image, endpoints(s), parallel);
  write_segment_outputs(root / "a", s.image, a, parallel);
  write_segment_outputs(root / "b", s.image, run_pipeline(s.image, endpoints(s), parallel), parallel);
  write_segment_outputs(root / "c", s.image, run_pipeline(s.image, endpoints(s), serial), serial);
  for (const char* f : {"walks.json", "splines.json", "seeds.json", "mask_union.png", "mask_0.png", "mask_1.png"}) {
    ASSERT_TRUE(fs::exists(root / "a" / f)) << f;
    EXPECT_EQ(slurp(root / "a" / f), slurp(root / "b" / f)) << f;
    EXPECT_EQ(slurp(root / "a" / f), slurp(root / "c" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(root / "a" / "overlay.png"));
  EXPECT_EQ(read_mask(root / "a" / "mask_union.png"), a.segmentation.union_mask);
  fs::remove_all(root);
}

TEST(Pipeline, DatasetSampleReadsBackAsTruth) {
  const Scene s = straight_scene();
  const PipelineConfig c;
  const PipelineOutput out = run_pipeline(s.image, endpoints(s), c);
  const fs::path dir = fs::temp_directory_path() / "dlo_test_sample";
  fs::remove_all(dir);
  write_dataset_sample(dir, s.image, out, c);
  const GroundTruth back = read_truth(dir);
  ASSERT_EQ(back.cable_count(), 1);
  EXPECT_EQ(back.union_mask, out.segmentation.union_mask);
  EXPECT_EQ(back.cable_points[0].front(), evaluate_spline(out.segmentation.splines[0], 0.0));
  fs::remove_all(dir);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("dlo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(DLO_CLI) + " " + args + " > " + (dir_ / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST_F(Cli, SegmentMatchesTheLibrary) {
  const Scene s = straight_scene();
  write_png(dir_ / "img.png", s.image);
  const auto [a, b] = s.endpoints.front();
  std::ostringstream args;
  args << "segment " << (dir_ / "img.png") << " --seed " << a.x << "," << a.y << " --seed " << b.x << "," << b.y
       << " --out " << (dir_ / "out");
  ASSERT_EQ(run(args.str()), 0) << slurp(dir_ / "log.txt");
  const PipelineConfig c;
  write_segment_outputs(dir_ / "lib", s.image, run_pipeline(s.image, endpoints(s), c), c);
  for (const char* f : {"walks.json", "splines.json", "mask_union.png"}) {
    EXPECT_EQ(slurp(dir_ / "out" / f), slurp(dir_ / "lib" / f)) << f;
  }
}

TEST_F(Cli, ExitCodes) {
  const Scene s = straight_scene();
  write_png(dir_ / "img.png", s.image);
  std::ofstream(dir_ / "junk.png") << "definitely not an image";
  std::ofstream(dir_ / "bad.json") << R"({"histogram_bins": 100})";
  const std::string img = (dir_ / "img.png").string(), out = " --out " + (dir_ / "o").string();
  EXPECT_EQ(run("segment " + img + " --seed 110,250 --seed 520,240" + out), 0);
  EXPECT_EQ(run("segment " + img + " --seed 110,250" + out), 3);
  EXPECT_EQ(run("segment " + img + " --seed 110,250 --seed 900,900" + out), 6);
  EXPECT_EQ(run("segment " + (dir_ / "junk.png").string() + " --seed 1,1 --seed 5,5" + out), 2);
  EXPECT_EQ(run("segment " + img + " --seed 110,250 --seed 520,240 --config " + (dir_ / "bad.json").string() + out), 5);
  EXPECT_EQ(run("segment " + img + " --seed nonsense" + out), 6);
  EXPECT_EQ(run("segment " + img + " --bogus-flag" + out), 1);
  EXPECT_EQ(run("no-such-command"), 1);
  // Seeds on a blank image: walks wander off and never close.
  write_png(dir_ / "blank.png", Image(200, 150, Rgb{90, 90, 90}));
  EXPECT_EQ(run("segment " + (dir_ / "blank.png").string() + " --seed 20,20 --seed 180,130 --max-steps 3 --radius 2" + out),
            4);
}

TEST_F(Cli, SynthThenEvaluate) {
  ASSERT_EQ(run("synth --kind homogeneous --count 2 --seed 5 --out " + (dir_ / "data").string()), 0);
  ASSERT_EQ(list_samples(dir_ / "data").size(), 2u);
  EXPECT_TRUE(fs::exists(dir_ / "data" / "sample_0000" / "scene.json"));
  ASSERT_EQ(run("evaluate " + (dir_ / "data").string() + " --out " + (dir_ / "report").string()), 0)
      << slurp(dir_ / "log.txt");
  const nlohmann::json report = nlohmann::json::parse(slurp(dir_ / "report" / "report.json"));
  ASSERT_EQ(report.at("images").size(), 2u);
  EXPECT_GE(report.at("weighted_iou").get<double>(), 0.7);
  EXPECT_TRUE(fs::exists(dir_ / "report" / "report.txt"));
}

}  // namespace
}  // namespace dlo
