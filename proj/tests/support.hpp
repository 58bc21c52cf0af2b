#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "dlo/graph.hpp"
#include "dlo/image.hpp"
#include "dlo/slic.hpp"

namespace dlo::test {

inline Image random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto v = rng();
      img.set(x, y, {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v >> 16)});
    }
  }
  return img;
}

// Smooth random blobs, closer to natural images than per-pixel noise.
inline Image blob_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Blob {
    double x, y, r;
    Rgb c;
  };
  std::vector<Blob> blobs;
  for (int i = 0; i < 12; ++i) {
    blobs.push_back({u(rng) * w, u(rng) * h, 4.0 + u(rng) * w / 4.0,
                     {static_cast<std::uint8_t>(u(rng) * 255), static_cast<std::uint8_t>(u(rng) * 255),
                      static_cast<std::uint8_t>(u(rng) * 255)}});
  }
  Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Rgb c{128, 128, 128};
      for (const Blob& b : blobs) {
        if ((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y) < b.r * b.r) c = b.c;
      }
      img.set(x, y, c);
    }
  }
  return img;
}

// Blobs with +/-20 per-channel pixel noise.
inline Image textured_image(int w, int h, std::uint64_t seed) {
  Image img = blob_image(w, h, seed);
  std::mt19937_64 rng(seed + 1000);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb c = img.at(x, y);
      const auto jitter = [&](int v) { return static_cast<std::uint8_t>(std::clamp(v + static_cast<int>(rng() % 41) - 20, 0, 255)); };
      img.set(x, y, {jitter(c.r), jitter(c.g), jitter(c.b)});
    }
  }
  return img;
}

// Label field whose value at (x, y) is f(x, y).
template <typename F>
LabelField label_field(int w, int h, F f) {
  LabelField l(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) l(x, y) = f(x, y);
  }
  return l;
}

// Histogram with all mass in one bin.
inline ColorHistogram spike(int bin, int bins_per_channel = 2) {
  ColorHistogram h(bins_per_channel);
  h.bins[bin] = 1.0;
  h.normalized = true;
  return h;
}

inline GraphVertex vertex(int id, Point2 c, ColorHistogram h, int area = 100) {
  GraphVertex v;
  v.id = id;
  v.centroid = c;
  v.area = area;
  v.histogram = std::move(h);
  return v;
}

}  // namespace dlo::test
