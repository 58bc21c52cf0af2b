#include "dlo/color.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dlo {
namespace {

constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

double linearize(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

const std::array<double, 256>& linear_table() {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (int i = 0; i < 256; ++i) t[i] = linearize(i / 255.0);
    return t;
  }();
  return table;
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

LabPixel rgb_to_lab(Rgb pixel) {
  const auto& lin = linear_table();
  const double r = lin[pixel.r];
  const double g = lin[pixel.g];
  const double b = lin[pixel.b];

  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

  const double fx = lab_f(x / kWhiteX);
  const double fy = lab_f(y / kWhiteY);
  const double fz = lab_f(z / kWhiteZ);

  LabPixel out;
  out.l = std::clamp(116.0 * fy - 16.0, 0.0, 100.0);
  out.a = 500.0 * (fx - fy);
  out.b = 200.0 * (fy - fz);
  return out;
}

HsvPixel rgb_to_hsv(Rgb pixel) {
  const double r = pixel.r / 255.0;
  const double g = pixel.g / 255.0;
  const double b = pixel.b / 255.0;
  const double max = std::max({r, g, b});
  const double min = std::min({r, g, b});
  const double chroma = max - min;

  HsvPixel out;
  out.v = max;
  out.s = max > 0.0 ? chroma / max : 0.0;
  if (chroma > 0.0) {
    double h;
    if (max == r) {
      h = 60.0 * std::fmod((g - b) / chroma, 6.0);
    } else if (max == g) {
      h = 60.0 * ((b - r) / chroma + 2.0);
    } else {
      h = 60.0 * ((r - g) / chroma + 4.0);
    }
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    out.h = h;
  }
  return out;
}

LabPlanes to_lab_planes(const Image& image) {
  LabPlanes planes;
  planes.width = image.width();
  planes.height = image.height();
  const std::size_t n = image.pixel_count();
  planes.l.resize(n);
  planes.a.resize(n);
  planes.b.resize(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const LabPixel lab = rgb_to_lab(image.at(static_cast<std::size_t>(i)));
    planes.l[i] = lab.l;
    planes.a[i] = lab.a;
    planes.b[i] = lab.b;
  }
  return planes;
}

}  // namespace dlo
