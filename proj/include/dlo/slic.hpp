#pragma once

#include <utility>
#include <vector>

#include "dlo/color.hpp"
#include "dlo/geometry.hpp"
#include "dlo/image.hpp"
#include "dlo/kernels.hpp"

namespace dlo {

struct SlicParams {
  int region_count = 0;  // K; 0 selects default_region_count()
  double compactness = 10.0;
  int max_iterations = 10;
  double min_region_fraction = 0.25;  // of S^2

  static int default_region_count(int width, int height) { return std::max(2, width * height / 300); }
  // Throws ErrorCode::invalid_config on violated invariants.
  void validate(int width, int height) const;
  int effective_region_count(int width, int height) const {
    return region_count > 0 ? region_count : default_region_count(width, height);
  }

  friend bool operator==(const SlicParams&, const SlicParams&) = default;
};

struct RegionStats {
  int id = 0;
  Point2 centroid;
  int area = 0;
  LabPixel mean_lab;
  Rgb mean_rgb;
};

// Partition of the image into 4-connected regions with ids [0, regions.size()).
struct SuperpixelMap {
  LabelField labels;
  std::vector<RegionStats> regions;
  double grid_interval = 0.0;  // S = sqrt(W*H/K)

  int width() const { return labels.width(); }
  int height() const { return labels.height(); }
  std::size_t region_count() const { return regions.size(); }
  int region_at(Point2 p) const;
};

SuperpixelMap slic_segment(const Image& image, const SlicParams& params,
                           kernels::Backend backend = kernels::Backend::parallel);

// Builds a map from an existing compact label field. Every region must be
// non-empty; connectivity is not checked here.
SuperpixelMap make_superpixel_map(const Image& image, LabelField labels, double grid_interval,
                                  kernels::Backend backend = kernels::Backend::parallel);

// Splits every label into its 4-connected components and folds into their
// largest adjacent neighbor every component that is not the largest piece of
// its label, whole labels smaller than `min_area`, and unassigned (negative)
// pixels. Relabels
// compactly in raster order of first appearance. Returns the region count.
int enforce_connectivity(LabelField& labels, int min_area);

// Unordered pairs (j < k) of regions sharing a horizontal or vertical pixel edge, sorted.
std::vector<std::pair<int, int>> region_adjacency_pairs(const SuperpixelMap& map);
std::vector<std::pair<int, int>> region_adjacency_pairs(const LabelField& labels);

}  // namespace dlo
