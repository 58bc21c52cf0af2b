#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlo/graph.hpp"
#include "dlo/slic.hpp"

namespace dlo {

struct WalkerParams {
  double c_visual = 10.0;
  double c_distance = 2.0;
  double von_mises_m = 4.0;
  int graph_order = 3;
  int max_steps = 200;
  // Closing radius r around other seeds' source points; <= 0 means 2 x the
  // superpixel grid interval, resolved by resolve_radius().
  double termination_radius_px = 0.0;
  double min_step_likelihood = 1e-6;
  int backtrack_window = 2;
  // Weight of the mean log visual likelihood of each walk vertex against the seed
  // vertex in the walk selection score; 0 ranks walks by smoothness alone.
  double appearance_weight = 1.0;

  // Throws ErrorCode::invalid_config.
  void validate(int available_graph_order) const;
  double resolve_radius(double grid_interval) const {
    return termination_radius_px > 0.0 ? termination_radius_px : 2.0 * grid_interval;
  }

  friend bool operator==(const WalkerParams&, const WalkerParams&) = default;
};

enum class WalkStatus { active, closed, aborted };
const char* to_string(WalkStatus status);

struct Seed {
  int id = 0;
  int vertex_id = 0;
  Point2 source_point;
};

// Seed for the superpixel containing `point`. Throws ErrorCode::invalid_seed outside the image.
Seed make_seed(int id, const SuperpixelMap& map, Point2 point);

struct StepScore {
  int candidate = 0;
  int hop_order = 0;
  double distance_px = 0.0;
  double p_visual = 0.0;
  double p_curvature = 0.0;
  double p_distance = 0.0;
  double p_total = 0.0;
};

struct Walk {
  int id = 0;
  std::vector<int> vertices;
  int seed_start = 0;
  std::optional<int> seed_end;
  WalkStatus status = WalkStatus::active;
  std::vector<double> edge_angles;
  double log_curvature_score = 0.0;  // running sum of log von Mises terms
  int curvature_terms = 0;
  double log_appearance_score = 0.0;  // running sum of log visual terms against the seed vertex
  int appearance_terms = 0;
  int steps = 0;  // extensions performed after the initial edge
  std::string abort_reason;
  std::vector<std::vector<StepScore>> step_log;  // filled only when recording

  int last() const { return vertices.back(); }
  // log_curvature_score / curvature_terms; a walk without any turn scores as perfectly straight.
  double mean_log_curvature(double von_mises_m) const;
  double mean_log_appearance() const { return appearance_terms > 0 ? log_appearance_score / appearance_terms : 0.0; }
  // Score used to pick the surviving walk per seed.
  double selection_score(const WalkerParams& params) const;
};

// Initial walk [start] or [start, next].
Walk make_walk(int id, const Seed& seed, const RegionGraph& graph, std::optional<int> next = std::nullopt,
               const WalkerParams& params = {});

double visual_likelihood(const Walk& walk, int candidate, const RegionGraph& graph, const WalkerParams& params);
// Neutral (1) while the extended walk has fewer than three vertices; otherwise the
// single von Mises term between the last edge and the candidate edge.
double curvature_likelihood(const Walk& walk, int candidate, const RegionGraph& graph, const WalkerParams& params);
double distance_likelihood(const Walk& walk, int candidate, std::span<const int> candidate_set,
                           const RegionGraph& graph, const WalkerParams& params);

// Candidates are the order-<=graph_order neighborhood of the last vertex minus the
// last backtrack_window vertices; candidates whose centroid coincides with the
// last centroid carry no direction and are skipped.
std::vector<int> candidate_set(const Walk& walk, const RegionGraph& graph, const WalkerParams& params);
std::vector<StepScore> score_candidates(const Walk& walk, const RegionGraph& graph, const WalkerParams& params);

// Highest p_total, ties to the lowest vertex id. Empty input returns nullopt.
std::optional<StepScore> best_candidate(std::span<const StepScore> scores);

// Appends the most likely candidate, or marks the walk aborted.
void extend_walk(Walk& walk, const RegionGraph& graph, const WalkerParams& params, bool record_scores = false);

struct WalkRunOptions {
  bool record_scores = false;
  bool keep_all_walks = false;
  bool parallel = true;
};

struct WalkRun {
  std::vector<Walk> surviving;                // sorted by seed_start, then walk id
  std::vector<Walk> all_walks;                // only with keep_all_walks
  std::vector<int> seeds_without_closed_walk;
  int walks_started = 0;
  long long extension_steps = 0;
  double extension_seconds = 0.0;  // summed over walks
};

// Seed the closing rule would fire on for the walk's current vertex, if any.
std::optional<int> closing_seed(const Walk& walk, const RegionGraph& graph, std::span<const Seed> seeds,
                                double radius);

WalkRun run_walks(const RegionGraph& graph, std::span<const Seed> seeds, const WalkerParams& params,
                  double termination_radius, const WalkRunOptions& options = {});

nlohmann::json walk_to_json(const Walk& walk, const RegionGraph& graph, const WalkerParams& params,
                            bool verbose = false);
nlohmann::json walks_to_json(std::span<const Walk> walks, const RegionGraph& graph, const WalkerParams& params,
                             bool verbose = false);

}  // namespace dlo
