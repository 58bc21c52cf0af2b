#pragma once

#include "dlo/image.hpp"

namespace dlo {

// CIELAB under the D65 white point.
struct LabPixel {
  double l = 0.0;  // [0, 100]
  double a = 0.0;
  double b = 0.0;
};

struct HsvPixel {
  double h = 0.0;  // degrees, [0, 360); 0 for achromatic pixels
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

LabPixel rgb_to_lab(Rgb pixel);
HsvPixel rgb_to_hsv(Rgb pixel);

// Whole-image Lab conversion in planar layout, used by the superpixel kernels.
struct LabPlanes {
  int width = 0;
  int height = 0;
  std::vector<double> l, a, b;
};

LabPlanes to_lab_planes(const Image& image);

}  // namespace dlo
