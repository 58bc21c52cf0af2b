#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "dlo/model.hpp"

namespace dlo {
namespace {

// Last index k with knots[k] <= t < knots[k + 1], restricted to the valid spans.
int find_span(const std::vector<double>& knots, int degree, int control_count, double t) {
  if (t >= knots[control_count]) return control_count - 1;
  const auto it = std::upper_bound(knots.begin() + degree, knots.begin() + control_count + 1, t);
  return static_cast<int>(it - knots.begin()) - 1;
}

// Nonzero basis functions N_{span-degree..span}(t) (Cox-de Boor triangle).
std::vector<double> basis_functions(const std::vector<double>& knots, int degree, int span, double t) {
  std::vector<double> n(degree + 1, 0.0), left(degree + 1), right(degree + 1);
  n[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? n[r] / denom : 0.0;
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  return n;
}

// Symmetric positive definite band matrix, `bandwidth` super-diagonals, stored by rows.
class BandMatrix {
 public:
  BandMatrix(int size, int bandwidth)
      : size_(size), bw_(bandwidth), data_(static_cast<std::size_t>(size) * (bandwidth + 1), 0.0) {}

  double& at(int row, int offset) { return data_[static_cast<std::size_t>(row) * (bw_ + 1) + offset]; }
  double at(int row, int offset) const { return data_[static_cast<std::size_t>(row) * (bw_ + 1) + offset]; }
  int size() const { return size_; }
  int bandwidth() const { return bw_; }

  double max_diagonal() const {
    double m = 0.0;
    for (int i = 0; i < size_; ++i) m = std::max(m, at(i, 0));
    return m;
  }

  // In-place banded Cholesky; on success row i stores L(i + d, i) at offset d.
  bool factor() {
    const double floor = 1e-14 * std::max(1.0, max_diagonal());
    for (int j = 0; j < size_; ++j) {
      double diag = at(j, 0);
      for (int k = std::max(0, j - bw_); k < j; ++k) diag -= at(k, j - k) * at(k, j - k);
      if (!(diag > floor)) return false;
      at(j, 0) = std::sqrt(diag);
      for (int i = j + 1; i <= std::min(size_ - 1, j + bw_); ++i) {
        double v = at(j, i - j);
        for (int k = std::max(0, i - bw_); k < j; ++k) v -= at(k, i - k) * at(k, j - k);
        at(j, i - j) = v / at(j, 0);
      }
    }
    return true;
  }

  void solve(std::vector<double>& b) const {
    for (int i = 0; i < size_; ++i) {
      double v = b[i];
      for (int k = std::max(0, i - bw_); k < i; ++k) v -= at(k, i - k) * b[k];
      b[i] = v / at(i, 0);
    }
    for (int i = size_ - 1; i >= 0; --i) {
      double v = b[i];
      for (int k = i + 1; k <= std::min(size_ - 1, i + bw_); ++k) v -= at(i, k - i) * b[k];
      b[i] = v / at(i, 0);
    }
  }

 private:
  int size_;
  int bw_;
  std::vector<double> data_;
};

}  // namespace

std::vector<Point2> collapse_consecutive_duplicates(std::span<const Point2> points) {
  std::vector<Point2> out;
  for (const Point2& p : points) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  return out;
}

std::vector<double> chord_length_parameters(std::span<const Point2> points) {
  std::vector<double> t(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = euclidean_distance(points[i - 1], points[i]);
    require(d > 0.0, "consecutive points must be distinct");
    t[i] = t[i - 1] + d;
  }
  const double total = t.back();
  require(total > 0.0, "degenerate point sequence");
  for (double& v : t) v /= total;
  t.back() = 1.0;
  return t;
}

SplineModel fit_spline(std::span<const Point2> points, int degree) {
  require(degree >= 1, "spline degree must be at least 1");
  const std::vector<Point2> data = collapse_consecutive_duplicates(points);
  const int n = static_cast<int>(data.size());
  if (n < degree + 1) {
    fail(ErrorCode::invalid_argument, "spline fit needs at least " + std::to_string(degree + 1) +
                                          " distinct points, got " + std::to_string(n));
  }
  const std::vector<double> params = chord_length_parameters(data);

  const int interior = std::min(static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)))), n - degree - 1);
  const int control_count = interior + degree + 1;

  SplineModel model;
  model.degree = degree;
  model.knots.assign(degree + 1, 0.0);
  for (int j = 1; j <= interior; ++j) model.knots.push_back(static_cast<double>(j) / (interior + 1));
  model.knots.insert(model.knots.end(), degree + 1, 1.0);

  // Unknowns are the control points strictly between the two pinned ends.
  const int unknowns = control_count - 2;
  model.control_points.assign(control_count, Point2{});
  model.control_points.front() = data.front();
  model.control_points.back() = data.back();

  if (unknowns > 0) {
    BandMatrix normal(unknowns, degree);
    std::vector<double> rhs_x(unknowns, 0.0), rhs_y(unknowns, 0.0);
    for (int i = 1; i < n - 1; ++i) {
      const int span = find_span(model.knots, degree, control_count, params[i]);
      const std::vector<double> basis = basis_functions(model.knots, degree, span, params[i]);
      const int first = span - degree;
      Point2 residual = data[i];
      for (int a = 0; a <= degree; ++a) {
        const int col = first + a;
        if (col == 0) residual = residual - basis[a] * data.front();
        if (col == control_count - 1) residual = residual - basis[a] * data.back();
      }
      for (int a = 0; a <= degree; ++a) {
        const int row = first + a - 1;
        if (row < 0 || row >= unknowns) continue;
        rhs_x[row] += basis[a] * residual.x;
        rhs_y[row] += basis[a] * residual.y;
        for (int b = a; b <= degree; ++b) {
          const int col = first + b - 1;
          if (col < 0 || col >= unknowns) continue;
          normal.at(row, col - row) += basis[a] * basis[b];
        }
      }
    }
    BandMatrix factored = normal;
    if (!factored.factor()) {
      // Too few data parameters in some knot span: regularize.
      factored = normal;
      const double ridge = 1e-9 * std::max(1.0, normal.max_diagonal());
      for (int i = 0; i < unknowns; ++i) factored.at(i, 0) += ridge;
      if (!factored.factor()) fail(ErrorCode::invalid_argument, "spline normal equations are singular");
    }
    factored.solve(rhs_x);
    factored.solve(rhs_y);
    for (int i = 0; i < unknowns; ++i) model.control_points[i + 1] = {rhs_x[i], rhs_y[i]};
  }
  return model;
}

Point2 evaluate_spline(const SplineModel& model, double t) {
  const int p = model.degree;
  const int count = static_cast<int>(model.control_points.size());
  require(count >= p + 1 && model.knots.size() == static_cast<std::size_t>(count + p + 1), "invalid spline model");
  t = std::clamp(t, model.knots[p], model.knots[count]);
  const int span = find_span(model.knots, p, count, t);

  std::array<Point2, 8> local{};
  require(p < static_cast<int>(local.size()), "spline degree too high");
  for (int j = 0; j <= p; ++j) local[j] = model.control_points[span - p + j];
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      const int i = span - p + j;
      const double denom = model.knots[i + p - r + 1] - model.knots[i];
      const double alpha = denom != 0.0 ? (t - model.knots[i]) / denom : 0.0;
      local[j] = (1.0 - alpha) * local[j - 1] + alpha * local[j];
    }
  }
  return local[p];
}

double polyline_length(std::span<const Point2> polyline) {
  double total = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) total += euclidean_distance(polyline[i - 1], polyline[i]);
  return total;
}

std::vector<Point2> sample_spline(const SplineModel& model, double max_gap_px) {
  require(max_gap_px > 0.0, "sample gap must be positive");
  // The control polygon bounds the curve length from above.
  const double bound = polyline_length(model.control_points);
  const int initial = std::max(2, static_cast<int>(std::ceil(bound / max_gap_px)) + 1);

  std::vector<Point2> out;
  out.reserve(initial);
  Point2 prev = evaluate_spline(model, 0.0);
  double prev_t = 0.0;
  out.push_back(prev);
  for (int i = 1; i < initial; ++i) {
    const double t = static_cast<double>(i) / (initial - 1);
    const Point2 p = evaluate_spline(model, t);
    // Refine any interval whose chord is still too long.
    std::vector<std::pair<double, Point2>> stack{{t, p}};
    int guard = 0;
    while (!stack.empty()) {
      const auto [tb, pb] = stack.back();
      if (euclidean_distance(prev, pb) > max_gap_px && guard++ < 100000) {
        const double tm = 0.5 * (prev_t + tb);
        stack.push_back({tm, evaluate_spline(model, tm)});
        continue;
      }
      stack.pop_back();
      out.push_back(pb);
      prev = pb;
      prev_t = tb;
    }
  }
  return out;
}

const char* to_string(ThicknessStrategy strategy) {
  return strategy == ThicknessStrategy::equivalent_side ? "equivalent_side" : "area_per_length";
}

ThicknessStrategy thickness_strategy_from_string(const std::string& name) {
  if (name == "equivalent_side") return ThicknessStrategy::equivalent_side;
  if (name == "area_per_length") return ThicknessStrategy::area_per_length;
  fail(ErrorCode::invalid_config, "unknown thickness strategy '" + name + "'");
}

namespace {
std::vector<int> distinct_vertices(const Walk& walk) {
  std::vector<int> v = walk.vertices;
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}
}  // namespace

std::vector<int> fill_walk_gaps(const Walk& walk, const RegionGraph& graph) {
  std::vector<int> chain;
  if (walk.vertices.empty()) return chain;
  chain.push_back(walk.vertices.front());
  for (std::size_t i = 1; i < walk.vertices.size(); ++i) {
    const int u = walk.vertices[i - 1], v = walk.vertices[i];
    std::map<int, int> hops{{v, 0}};
    for (const NeighborhoodEntry& e : graph.neighborhood(v, graph.order())) hops[e.vertex_id] = e.hop_order;
    const Point2 a = graph.vertex(u).centroid, b = graph.vertex(v).centroid;
    int cur = u;
    while (cur != v && hops.contains(cur)) {
      int next = -1;
      double best = 0.0;
      for (int w : graph.adjacent(cur)) {
        auto it = hops.find(w);
        if (it == hops.end() || it->second != hops[cur] - 1) continue;
        const double d = point_segment_distance(graph.vertex(w).centroid, a, b);
        if (next < 0 || d < best || (d == best && w < next)) next = w, best = d;
      }
      if (next < 0) break;
      chain.push_back(next);
      cur = next;
    }
    if (chain.back() != v) chain.push_back(v);
  }
  return chain;
}

double estimate_thickness(const Walk& walk, const RegionGraph& graph) {
  return estimate_thickness(walk, graph, ThicknessStrategy::equivalent_side, 0.0);
}

double estimate_thickness(const Walk& walk, const RegionGraph& graph, ThicknessStrategy strategy,
                          double curve_length_px) {
  require(!walk.vertices.empty(), "walk is empty");
  const std::vector<int> vertices = distinct_vertices(walk);
  double value = 0.0;
  if (strategy == ThicknessStrategy::equivalent_side || curve_length_px <= 0.0) {
    for (int v : vertices) value += std::sqrt(static_cast<double>(graph.vertex(v).area));
    value /= static_cast<double>(vertices.size());
  } else {
    std::vector<int> chain = fill_walk_gaps(walk, graph);
    std::sort(chain.begin(), chain.end());
    chain.erase(std::unique(chain.begin(), chain.end()), chain.end());
    for (int v : chain) value += graph.vertex(v).area;
    value /= curve_length_px;
  }
  return std::max(1.0, value);
}

Mask render_polyline(std::span<const Point2> polyline, double thickness_px, int width, int height,
                     kernels::Backend backend) {
  Mask mask(width, height, 0);
  if (polyline.empty()) return mask;
  const double radius = 0.5 * thickness_px;
  if (backend == kernels::Backend::serial) {
    kernels::serial::stroke_polyline(polyline, radius, mask);
  } else {
    kernels::parallel::stroke_polyline(polyline, radius, mask);
  }
  return mask;
}

Mask render_mask(const SplineModel& model, int width, int height, double max_gap_px, kernels::Backend backend) {
  require(width > 0 && height > 0, "mask dimensions must be positive");
  require(model.thickness_px > 0.0, "spline thickness must be positive");
  const std::vector<Point2> samples = sample_spline(model, max_gap_px);
  return render_polyline(samples, model.thickness_px, width, height, backend);
}

SplineModel model_walk(const Walk& walk, const RegionGraph& graph, std::span<const Seed> seeds,
                       const SplineOptions& options) {
  std::vector<Point2> points;
  const auto seed_point = [&](int id) -> const Point2* {
    for (const Seed& s : seeds) {
      if (s.id == id) return &s.source_point;
    }
    return nullptr;
  };
  if (options.anchor_endpoints) {
    if (const Point2* p = seed_point(walk.seed_start)) points.push_back(*p);
  }
  for (int v : walk.vertices) points.push_back(graph.vertex(v).centroid);
  if (options.anchor_endpoints && walk.seed_end) {
    if (const Point2* p = seed_point(*walk.seed_end)) points.push_back(*p);
  }
  points = collapse_consecutive_duplicates(points);

  // Short walks: densify linearly so a cubic fit is always defined.
  const int needed = options.degree + 1;
  while (static_cast<int>(points.size()) < needed) {
    require(points.size() >= 2, "walk is degenerate: a single location");
    std::vector<Point2> dense;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
      dense.push_back(points[i]);
      dense.push_back(0.5 * (points[i] + points[i + 1]));
    }
    dense.push_back(points.back());
    points = std::move(dense);
  }

  SplineModel model = fit_spline(points, options.degree);
  const double length = polyline_length(sample_spline(model, options.sample_gap_px));
  model.thickness_px = estimate_thickness(walk, graph, options.thickness, length);

  double r = 0.0, g = 0.0, b = 0.0, area = 0.0;
  std::vector<int> vertices = walk.vertices;
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  for (int v : vertices) {
    const GraphVertex& gv = graph.vertex(v);
    r += gv.mean_rgb.r * static_cast<double>(gv.area);
    g += gv.mean_rgb.g * static_cast<double>(gv.area);
    b += gv.mean_rgb.b * static_cast<double>(gv.area);
    area += gv.area;
  }
  model.color = {static_cast<std::uint8_t>(std::lround(r / area)), static_cast<std::uint8_t>(std::lround(g / area)),
                 static_cast<std::uint8_t>(std::lround(b / area))};
  return model;
}

LabelField SegmentationResult::label_image() const {
  LabelField labels(width, height, 0);
  for (std::size_t k = 0; k < object_masks.size(); ++k) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (object_masks[k][i]) labels[i] = static_cast<std::int32_t>(k + 1);
    }
  }
  return labels;
}

SegmentationResult segment_walks(std::span<const Walk> walks, const RegionGraph& graph, std::span<const Seed> seeds,
                                 const SplineOptions& options, int width, int height, kernels::Backend backend) {
  SegmentationResult result;
  result.width = width;
  result.height = height;
  for (const Walk& w : walks) {
    result.walk_ids.push_back(w.id);
    result.splines.push_back(model_walk(w, graph, seeds, options));
    result.object_masks.push_back(render_mask(result.splines.back(), width, height, options.sample_gap_px, backend));
  }
  result.union_mask = mask_union(result.object_masks, width, height);
  return result;
}

nlohmann::json spline_to_json(const SplineModel& model, double sample_gap_px) {
  nlohmann::json control = nlohmann::json::array();
  for (const Point2& p : model.control_points) control.push_back({p.x, p.y});
  nlohmann::json points = nlohmann::json::array();
  for (const Point2& p : sample_spline(model, sample_gap_px)) points.push_back({p.x, p.y});
  return {{"version", 1},
          {"degree", model.degree},
          {"knots", model.knots},
          {"control_points", std::move(control)},
          {"thickness_px", model.thickness_px},
          {"color", {model.color.r, model.color.g, model.color.b}},
          {"points", std::move(points)}};
}

nlohmann::json splines_to_json(std::span<const SplineModel> models, double sample_gap_px) {
  nlohmann::json list = nlohmann::json::array();
  for (const SplineModel& m : models) list.push_back(spline_to_json(m, sample_gap_px));
  return {{"version", 1}, {"splines", std::move(list)}};
}

SplineModel spline_from_json(const nlohmann::json& doc) {
  try {
    SplineModel m;
    m.degree = doc.at("degree").get<int>();
    m.knots = doc.at("knots").get<std::vector<double>>();
    for (const auto& p : doc.at("control_points")) m.control_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    m.thickness_px = doc.at("thickness_px").get<double>();
    const auto& c = doc.at("color");
    m.color = {c.at(0).get<std::uint8_t>(), c.at(1).get<std::uint8_t>(), c.at(2).get<std::uint8_t>()};
    require(m.knots.size() == m.control_points.size() + m.degree + 1, "knot count does not match control points");
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("malformed spline document: ") + e.what());
  }
}

}  // namespace dlo
