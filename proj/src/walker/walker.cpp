#include "dlo/walker.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <map>
#include <string>

#include "dlo/likelihood.hpp"

namespace dlo {

void WalkerParams::validate(int available_graph_order) const {
  const auto bad = [](const std::string& what) { fail(ErrorCode::invalid_config, what); };
  if (!(c_visual > 0.0)) bad("c_visual must be positive");
  if (!(c_distance > 0.0)) bad("c_distance must be positive");
  if (!(von_mises_m > 0.0)) bad("von Mises concentration must be positive");
  if (graph_order < 1) bad("walker graph order must be at least 1");
  if (graph_order > available_graph_order) {
    bad("walker graph order " + std::to_string(graph_order) + " exceeds graph order " +
        std::to_string(available_graph_order));
  }
  if (max_steps < 1) bad("max_steps must be at least 1");
  if (!(min_step_likelihood > 0.0)) bad("min_step_likelihood must be positive");
  if (!(appearance_weight >= 0.0)) bad("appearance_weight must be non-negative");
  if (backtrack_window < 1) bad("backtrack_window must be at least 1");
}

const char* to_string(WalkStatus status) {
  switch (status) {
    case WalkStatus::active: return "active";
    case WalkStatus::closed: return "closed";
    case WalkStatus::aborted: return "aborted";
  }
  return "unknown";
}

Seed make_seed(int id, const SuperpixelMap& map, Point2 point) {
  if (!(point.x >= 0.0 && point.y >= 0.0 && point.x <= map.width() - 1 && point.y <= map.height() - 1)) {
    fail(ErrorCode::invalid_seed, "seed (" + std::to_string(point.x) + ", " + std::to_string(point.y) +
                                      ") lies outside the image");
  }
  return {id, map.region_at(point), point};
}

double Walk::mean_log_curvature(double von_mises_m) const {
  return curvature_terms > 0 ? log_curvature_score / curvature_terms : log_von_mises(0.0, von_mises_m);
}

double Walk::selection_score(const WalkerParams& params) const {
  return mean_log_curvature(params.von_mises_m) + params.appearance_weight * mean_log_appearance();
}

namespace {

void add_appearance(Walk& walk, int vertex, const RegionGraph& graph, const WalkerParams& params) {
  const double similarity =
      histogram_similarity(graph.vertex(walk.vertices.front()).histogram, graph.vertex(vertex).histogram);
  walk.log_appearance_score += std::log(bradford_likelihood(1.0 - similarity, params.c_visual));
  ++walk.appearance_terms;
}

}  // namespace

Walk make_walk(int id, const Seed& seed, const RegionGraph& graph, std::optional<int> next,
               const WalkerParams& params) {
  Walk walk;
  walk.id = id;
  walk.seed_start = seed.id;
  walk.vertices.push_back(seed.vertex_id);
  if (next) {
    walk.edge_angles.push_back(
        edge_angle(graph.vertex(seed.vertex_id).centroid, graph.vertex(*next).centroid));
    walk.vertices.push_back(*next);
    add_appearance(walk, *next, graph, params);
  }
  return walk;
}

double visual_likelihood(const Walk& walk, int candidate, const RegionGraph& graph, const WalkerParams& params) {
  require(!walk.vertices.empty(), "walk is empty");
  const double similarity =
      histogram_similarity(graph.vertex(walk.last()).histogram, graph.vertex(candidate).histogram);
  return bradford_likelihood(1.0 - similarity, params.c_visual);
}

double curvature_likelihood(const Walk& walk, int candidate, const RegionGraph& graph, const WalkerParams& params) {
  const double next = edge_angle(graph.vertex(walk.last()).centroid, graph.vertex(candidate).centroid);
  if (walk.edge_angles.empty()) return 1.0;
  return von_mises(half_turn(walk.edge_angles.back(), next), params.von_mises_m);
}

double distance_likelihood(const Walk& walk, int candidate, std::span<const int> candidates,
                           const RegionGraph& graph, const WalkerParams& params) {
  require(!candidates.empty(), "empty candidate set");
  require(std::find(candidates.begin(), candidates.end(), candidate) != candidates.end(),
          "candidate is not in the candidate set");
  const Point2 from = graph.vertex(walk.last()).centroid;
  double farthest = 0.0;
  for (int c : candidates) farthest = std::max(farthest, euclidean_distance(from, graph.vertex(c).centroid));
  require(farthest > 0.0, "all candidates coincide with the last centroid");
  const double x = euclidean_distance(from, graph.vertex(candidate).centroid) / farthest;
  return bradford_likelihood(std::min(x, 1.0), params.c_distance);
}

std::vector<int> candidate_set(const Walk& walk, const RegionGraph& graph, const WalkerParams& params) {
  const std::size_t window = std::min<std::size_t>(params.backtrack_window, walk.vertices.size());
  const std::span<const int> excluded(walk.vertices.data() + walk.vertices.size() - window, window);
  const Point2 from = graph.vertex(walk.last()).centroid;
  std::vector<int> out;
  for (const NeighborhoodEntry& e : graph.neighborhood(walk.last(), params.graph_order, excluded)) {
    if (graph.vertex(e.vertex_id).centroid == from) continue;
    out.push_back(e.vertex_id);
  }
  return out;
}

std::vector<StepScore> score_candidates(const Walk& walk, const RegionGraph& graph, const WalkerParams& params) {
  require(walk.status == WalkStatus::active, "walk is not active");
  const std::size_t window = std::min<std::size_t>(params.backtrack_window, walk.vertices.size());
  const std::span<const int> excluded(walk.vertices.data() + walk.vertices.size() - window, window);
  const Point2 from = graph.vertex(walk.last()).centroid;

  std::vector<StepScore> scores;
  double farthest = 0.0;
  for (const NeighborhoodEntry& e : graph.neighborhood(walk.last(), params.graph_order, excluded)) {
    const Point2 to = graph.vertex(e.vertex_id).centroid;
    if (to == from) continue;
    StepScore s;
    s.candidate = e.vertex_id;
    s.hop_order = e.hop_order;
    s.distance_px = euclidean_distance(from, to);
    farthest = std::max(farthest, s.distance_px);
    scores.push_back(s);
  }
  for (StepScore& s : scores) {
    s.p_visual = visual_likelihood(walk, s.candidate, graph, params);
    s.p_curvature = curvature_likelihood(walk, s.candidate, graph, params);
    s.p_distance = bradford_likelihood(std::min(s.distance_px / farthest, 1.0), params.c_distance);
    s.p_total = s.p_visual * s.p_curvature * s.p_distance;
  }
  return scores;
}

std::optional<StepScore> best_candidate(std::span<const StepScore> scores) {
  std::optional<StepScore> best;
  for (const StepScore& s : scores) {
    if (!best || s.p_total > best->p_total || (s.p_total == best->p_total && s.candidate < best->candidate)) {
      best = s;
    }
  }
  return best;
}

void extend_walk(Walk& walk, const RegionGraph& graph, const WalkerParams& params, bool record_scores) {
  if (walk.status != WalkStatus::active) return;
  std::vector<StepScore> scores = score_candidates(walk, graph, params);
  const std::optional<StepScore> best = best_candidate(scores);
  if (record_scores) walk.step_log.push_back(scores);
  if (!best) {
    walk.status = WalkStatus::aborted;
    walk.abort_reason = "no candidates";
    return;
  }
  if (best->p_total < params.min_step_likelihood) {
    walk.status = WalkStatus::aborted;
    walk.abort_reason = "step likelihood below floor";
    return;
  }
  const double angle = edge_angle(graph.vertex(walk.last()).centroid, graph.vertex(best->candidate).centroid);
  if (!walk.edge_angles.empty()) {
    walk.log_curvature_score += log_von_mises(half_turn(walk.edge_angles.back(), angle), params.von_mises_m);
    ++walk.curvature_terms;
  }
  walk.edge_angles.push_back(angle);
  add_appearance(walk, best->candidate, graph, params);
  walk.vertices.push_back(best->candidate);
  ++walk.steps;
}

std::optional<int> closing_seed(const Walk& walk, const RegionGraph& graph, std::span<const Seed> seeds,
                                double radius) {
  const Point2 here = graph.vertex(walk.last()).centroid;
  std::optional<int> hit;
  double hit_distance = 0.0;
  for (const Seed& s : seeds) {
    if (s.id == walk.seed_start) continue;
    const double d = s.vertex_id == walk.last() ? 0.0 : euclidean_distance(here, s.source_point);
    if (d > radius) continue;
    if (!hit || d < hit_distance || (d == hit_distance && s.id < *hit)) {
      hit = s.id;
      hit_distance = d;
    }
  }
  return hit;
}

namespace {

void drive_walk(Walk& walk, const RegionGraph& graph, std::span<const Seed> seeds, const WalkerParams& params,
                double radius, bool record) {
  const auto try_close = [&] {
    if (auto end = closing_seed(walk, graph, seeds, radius)) {
      walk.status = WalkStatus::closed;
      walk.seed_end = *end;
    }
  };
  try_close();
  while (walk.status == WalkStatus::active && walk.steps < params.max_steps) {
    extend_walk(walk, graph, params, record);
    if (walk.status == WalkStatus::active) try_close();
  }
  if (walk.status == WalkStatus::active) {
    walk.status = WalkStatus::aborted;
    walk.abort_reason = "step limit reached";
  }
}

// Scores closer than this count as tied; ties keep the walk visiting more
// vertices, then the lower walk id.
constexpr double kScoreTie = 1e-3;

bool better(const Walk& a, const Walk& b, const WalkerParams& params) {
  const double sa = a.selection_score(params);
  const double sb = b.selection_score(params);
  if (std::abs(sa - sb) >= kScoreTie) return sa > sb;
  if (a.vertices.size() != b.vertices.size()) return a.vertices.size() > b.vertices.size();
  return a.id < b.id;
}

}  // namespace

WalkRun run_walks(const RegionGraph& graph, std::span<const Seed> seeds_in, const WalkerParams& params,
                  double termination_radius, const WalkRunOptions& options) {
  if (seeds_in.size() < 2) fail(ErrorCode::insufficient_seeds, "at least two seeds are required");
  params.validate(graph.order());
  require(termination_radius > 0.0, "termination radius must be positive");

  std::vector<Seed> seeds(seeds_in.begin(), seeds_in.end());
  std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < seeds.size(); ++i) require(seeds[i].id != seeds[i - 1].id, "duplicate seed id");

  std::vector<Walk> walks;
  for (const Seed& s : seeds) {
    const Point2 origin = graph.vertex(s.vertex_id).centroid;
    for (const NeighborhoodEntry& e : graph.neighborhood(s.vertex_id, params.graph_order)) {
      if (graph.vertex(e.vertex_id).centroid == origin) continue;
      walks.push_back(make_walk(static_cast<int>(walks.size()), s, graph, e.vertex_id, params));
    }
  }

  std::vector<double> seconds(walks.size(), 0.0);
  const auto count = static_cast<std::ptrdiff_t>(walks.size());
#pragma omp parallel for schedule(dynamic, 1) if (options.parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    drive_walk(walks[i], graph, seeds, params, termination_radius, options.record_scores);
    seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  WalkRun run;
  run.walks_started = static_cast<int>(walks.size());
  for (std::size_t i = 0; i < walks.size(); ++i) {
    run.extension_steps += walks[i].steps;
    run.extension_seconds += seconds[i];
  }

  std::map<int, const Walk*> best_per_seed;
  for (const Walk& w : walks) {
    if (w.status != WalkStatus::closed) continue;
    auto [it, inserted] = best_per_seed.try_emplace(w.seed_start, &w);
    if (!inserted && better(w, *it->second, params)) it->second = &w;
  }
  for (const Seed& s : seeds) {
    if (!best_per_seed.contains(s.id)) run.seeds_without_closed_walk.push_back(s.id);
  }

  // A pair of seeds joined from both ends keeps only the better-scoring walk.
  std::map<std::pair<int, int>, const Walk*> best_per_pair;
  for (const auto& [seed, w] : best_per_seed) {
    const std::pair<int, int> key{std::min(w->seed_start, *w->seed_end), std::max(w->seed_start, *w->seed_end)};
    auto [it, inserted] = best_per_pair.try_emplace(key, w);
    if (!inserted && better(*w, *it->second, params)) it->second = w;
  }
  for (const auto& [key, w] : best_per_pair) run.surviving.push_back(*w);
  std::sort(run.surviving.begin(), run.surviving.end(), [](const Walk& a, const Walk& b) {
    return a.seed_start != b.seed_start ? a.seed_start < b.seed_start : a.id < b.id;
  });
  if (options.keep_all_walks) run.all_walks = std::move(walks);
  return run;
}

nlohmann::json walk_to_json(const Walk& walk, const RegionGraph& graph, const WalkerParams& params, bool verbose) {
  nlohmann::json polyline = nlohmann::json::array();
  for (int v : walk.vertices) {
    const Point2 p = graph.vertex(v).centroid;
    polyline.push_back({p.x, p.y});
  }
  nlohmann::json doc = {
      {"id", walk.id},
      {"seed_start", walk.seed_start},
      {"seed_end", walk.seed_end ? nlohmann::json(*walk.seed_end) : nlohmann::json(nullptr)},
      {"status", to_string(walk.status)},
      {"vertices", walk.vertices},
      {"polyline", std::move(polyline)},
      {"log_curvature_score", walk.log_curvature_score},
      {"curvature_terms", walk.curvature_terms},
      {"mean_log_curvature", walk.mean_log_curvature(params.von_mises_m)},
      {"mean_log_appearance", walk.mean_log_appearance()},
      {"selection_score", walk.selection_score(params)},
      {"steps", walk.steps},
  };
  if (!walk.abort_reason.empty()) doc["abort_reason"] = walk.abort_reason;
  if (verbose) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : walk.step_log) {
      nlohmann::json scores = nlohmann::json::array();
      for (const StepScore& s : step) {
        scores.push_back({{"candidate", s.candidate},
                          {"hop_order", s.hop_order},
                          {"distance_px", s.distance_px},
                          {"p_visual", s.p_visual},
                          {"p_curvature", s.p_curvature},
                          {"p_distance", s.p_distance},
                          {"p_total", s.p_total}});
      }
      steps.push_back(std::move(scores));
    }
    doc["step_scores"] = std::move(steps);
  }
  return doc;
}

nlohmann::json walks_to_json(std::span<const Walk> walks, const RegionGraph& graph, const WalkerParams& params,
                             bool verbose) {
  nlohmann::json list = nlohmann::json::array();
  for (const Walk& w : walks) list.push_back(walk_to_json(w, graph, params, verbose));
  return {{"version", 1}, {"walks", std::move(list)}};
}

}  // namespace dlo
