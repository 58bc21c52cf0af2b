#include "dlo/slic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace dlo {
namespace {

double gradient_at(const LabPlanes& lab, int x, int y) {
  if (x <= 0 || y <= 0 || x >= lab.width - 1 || y >= lab.height - 1) {
    return std::numeric_limits<double>::infinity();
  }
  const auto idx = [&](int px, int py) { return static_cast<std::size_t>(py) * lab.width + px; };
  const auto diff2 = [&](std::size_t i, std::size_t j) {
    const double dl = lab.l[i] - lab.l[j];
    const double da = lab.a[i] - lab.a[j];
    const double db = lab.b[i] - lab.b[j];
    return dl * dl + da * da + db * db;
  };
  return diff2(idx(x + 1, y), idx(x - 1, y)) + diff2(idx(x, y + 1), idx(x, y - 1));
}

// Regular grid seeding, each seed nudged to the lowest-gradient pixel of its 3x3 neighborhood.
std::vector<kernels::SlicCenter> seed_centers(const LabPlanes& lab, int region_count, double& step_out) {
  const double s = std::sqrt(static_cast<double>(lab.width) * lab.height / region_count);
  const int nx = std::clamp(static_cast<int>(std::lround(lab.width / s)), 1, lab.width);
  const int ny = std::clamp(static_cast<int>(std::lround(lab.height / s)), 1, lab.height);
  const double step_x = static_cast<double>(lab.width) / nx;
  const double step_y = static_cast<double>(lab.height) / ny;
  step_out = std::max({s, step_x, step_y});

  std::vector<kernels::SlicCenter> centers;
  centers.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double cx = (i + 0.5) * step_x - 0.5;
      double cy = (j + 0.5) * step_y - 0.5;
      const int rx = std::clamp(static_cast<int>(std::lround(cx)), 0, lab.width - 1);
      const int ry = std::clamp(static_cast<int>(std::lround(cy)), 0, lab.height - 1);
      double best = gradient_at(lab, rx, ry);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double g = gradient_at(lab, rx + dx, ry + dy);
          if (g < best) {
            best = g;
            cx = rx + dx;
            cy = ry + dy;
          }
        }
      }
      const int px = std::clamp(static_cast<int>(std::lround(cx)), 0, lab.width - 1);
      const int py = std::clamp(static_cast<int>(std::lround(cy)), 0, lab.height - 1);
      const std::size_t at = static_cast<std::size_t>(py) * lab.width + px;
      centers.push_back({lab.l[at], lab.a[at], lab.b[at], cx, cy});
    }
  }
  return centers;
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
};

}  // namespace

void SlicParams::validate(int width, int height) const {
  const long long pixels = static_cast<long long>(width) * height;
  const int k = effective_region_count(width, height);
  if (k < 2) fail(ErrorCode::invalid_config, "superpixel count must be at least 2");
  if (k > pixels) {
    fail(ErrorCode::invalid_config,
         "superpixel count " + std::to_string(k) + " exceeds pixel count " + std::to_string(pixels));
  }
  if (!(compactness > 0.0)) fail(ErrorCode::invalid_config, "compactness must be positive");
  if (max_iterations < 1) fail(ErrorCode::invalid_config, "max_iterations must be at least 1");
  if (!(min_region_fraction >= 0.0)) fail(ErrorCode::invalid_config, "min_region_fraction must be >= 0");
}

int SuperpixelMap::region_at(Point2 p) const {
  const int x = static_cast<int>(std::lround(p.x));
  const int y = static_cast<int>(std::lround(p.y));
  if (!labels.contains(x, y)) fail(ErrorCode::invalid_seed, "point lies outside the image");
  return labels(x, y);
}

int enforce_connectivity(LabelField& labels, int min_area) {
  const int w = labels.width();
  const int h = labels.height();
  const std::size_t n = labels.size();

  // Component labeling (4-connectivity).
  std::vector<int> component(n, -1);
  std::vector<int> sizes;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (component[start] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    const std::int32_t label = labels[start];
    int size = 0;
    component[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++size;
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      const std::size_t nbrs[4] = {i - 1, i + 1, i - w, i + w};
      const bool ok[4] = {x > 0, x < w - 1, y > 0, y < h - 1};
      for (int k = 0; k < 4; ++k) {
        if (!ok[k]) continue;
        const std::size_t j = nbrs[k];
        if (component[j] < 0 && labels[j] == label) {
          component[j] = id;
          stack.push_back(j);
        }
      }
    }
    sizes.push_back(size);
  }

  const std::size_t components = sizes.size();
  std::vector<std::vector<int>> adjacency(components);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (x + 1 < w && component[i] != component[i + 1]) {
        adjacency[component[i]].push_back(component[i + 1]);
        adjacency[component[i + 1]].push_back(component[i]);
      }
      if (y + 1 < h && component[i] != component[i + w]) {
        adjacency[component[i]].push_back(component[i + w]);
        adjacency[component[i + w]].push_back(component[i]);
      }
    }
  }
  for (auto& list : adjacency) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  // A component is folded when it is not the largest piece of its label, or
  // when the whole label is smaller than min_area.
  std::vector<int> label_of(components), label_area, main_component;
  for (std::size_t i = 0; i < n; ++i) label_of[component[i]] = labels[i];
  for (std::size_t c = 0; c < components; ++c) {
    if (label_of[c] < 0) continue;
    const auto l = static_cast<std::size_t>(label_of[c]);
    if (l >= label_area.size()) label_area.resize(l + 1, 0), main_component.resize(l + 1, -1);
    label_area[l] += sizes[c];
    if (main_component[l] < 0 || sizes[c] > sizes[main_component[l]]) main_component[l] = static_cast<int>(c);
  }
  std::vector<char> foldable(components, 0);
  for (std::size_t c = 0; c < components; ++c) {
    const int l = label_of[c];
    foldable[c] = l < 0 || main_component[l] != static_cast<int>(c) || label_area[l] < min_area;
  }

  // Fold into the largest neighbor, smallest first.
  DisjointSets sets(components);
  std::vector<std::vector<int>> members(components);
  for (std::size_t c = 0; c < components; ++c) members[c] = {static_cast<int>(c)};
  using Entry = std::pair<int, int>;  // (size, component)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t c = 0; c < components; ++c) {
    if (foldable[c]) queue.push({sizes[c], static_cast<int>(c)});
  }
  while (!queue.empty()) {
    const auto [size, c] = queue.top();
    queue.pop();
    if (sets.find(c) != c || sizes[c] != size || !foldable[c]) continue;
    int best = -1;
    for (int m : members[c]) {
      for (int nb : adjacency[m]) {
        const int root = sets.find(nb);
        if (root == c) continue;
        if (best < 0 || sizes[root] > sizes[best] || (sizes[root] == sizes[best] && root < best)) best = root;
      }
    }
    if (best < 0) continue;  // the component covers the whole image
    sets.parent[c] = best;
    sizes[best] += sizes[c];
    auto& into = members[best];
    into.insert(into.end(), members[c].begin(), members[c].end());
    members[c].clear();
    if (foldable[best]) queue.push({sizes[best], best});
  }

  std::vector<int> compact(components, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int root = sets.find(component[i]);
    if (compact[root] < 0) compact[root] = next++;
    labels[i] = compact[root];
  }
  return next;
}

SuperpixelMap make_superpixel_map(const Image& image, LabelField labels, double grid_interval,
                                  kernels::Backend backend) {
  require(labels.width() == image.width() && labels.height() == image.height(),
          "label field and image dimensions differ");
  std::int32_t max_label = -1;
  for (std::int32_t l : labels.values()) {
    require(l >= 0, "labels must be non-negative");
    max_label = std::max(max_label, l);
  }
  const auto regions = static_cast<std::size_t>(max_label + 1);
  const LabPlanes lab = to_lab_planes(image);
  const kernels::RegionSums sums = backend == kernels::Backend::serial
                                       ? kernels::serial::region_sums(image, lab, labels.values(), regions)
                                       : kernels::parallel::region_sums(image, lab, labels.values(), regions);
  SuperpixelMap map;
  map.grid_interval = grid_interval;
  map.regions.resize(regions);
  for (std::size_t r = 0; r < regions; ++r) {
    const double area = static_cast<double>(sums.area[r]);
    require(sums.area[r] > 0, "label " + std::to_string(r) + " has no pixels");
    RegionStats& stats = map.regions[r];
    stats.id = static_cast<int>(r);
    stats.area = static_cast<int>(sums.area[r]);
    stats.centroid = {sums.sum_x[r] / area, sums.sum_y[r] / area};
    stats.mean_lab = {sums.sum_l[r] / area, sums.sum_a[r] / area, sums.sum_b[r] / area};
    stats.mean_rgb = {static_cast<std::uint8_t>(std::lround(sums.sum_r[r] / area)),
                      static_cast<std::uint8_t>(std::lround(sums.sum_g[r] / area)),
                      static_cast<std::uint8_t>(std::lround(sums.sum_bl[r] / area))};
  }
  map.labels = std::move(labels);
  return map;
}

SuperpixelMap slic_segment(const Image& image, const SlicParams& params, kernels::Backend backend) {
  if (image.empty()) fail(ErrorCode::bad_image, "empty image");
  params.validate(image.width(), image.height());
  const int k = params.effective_region_count(image.width(), image.height());

  const LabPlanes lab = to_lab_planes(image);
  double radius = 0.0;
  std::vector<kernels::SlicCenter> centers = seed_centers(lab, k, radius);
  const double interval = std::sqrt(static_cast<double>(image.width()) * image.height() / k);
  const double spatial_scale = (params.compactness / interval) * (params.compactness / interval);

  LabelField labels(image.width(), image.height(), -1);
  std::vector<std::int32_t> previous;
  std::vector<double> dist(labels.size());
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    if (backend == kernels::Backend::serial) {
      kernels::serial::slic_assign(lab, centers, spatial_scale, radius, labels.values(), dist);
    } else {
      kernels::parallel::slic_assign(lab, centers, spatial_scale, radius, labels.values(), dist);
    }
    if (std::ranges::equal(previous, labels.values())) break;
    previous.assign(labels.values().begin(), labels.values().end());
    centers = backend == kernels::Backend::serial
                  ? kernels::serial::slic_update(lab, labels.values(), centers, radius)
                  : kernels::parallel::slic_update(lab, labels.values(), centers, radius);
  }

  const int min_area =
      std::max(1, static_cast<int>(std::lround(params.min_region_fraction * interval * interval)));
  enforce_connectivity(labels, min_area);
  return make_superpixel_map(image, std::move(labels), interval, backend);
}

std::vector<std::pair<int, int>> region_adjacency_pairs(const LabelField& labels) {
  std::vector<std::pair<int, int>> pairs;
  const int w = labels.width();
  const int h = labels.height();
  const auto add = [&](std::int32_t a, std::int32_t b) {
    if (a != b) pairs.emplace_back(std::min(a, b), std::max(a, b));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) add(labels(x, y), labels(x + 1, y));
      if (y + 1 < h) add(labels(x, y), labels(x, y + 1));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::vector<std::pair<int, int>> region_adjacency_pairs(const SuperpixelMap& map) {
  return region_adjacency_pairs(map.labels);
}

}  // namespace dlo
