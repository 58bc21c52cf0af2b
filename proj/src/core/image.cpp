#include "dlo/image.hpp"

#include <algorithm>
#include <string>

namespace dlo {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  require(width > 0 && height > 0, "image dimensions must be positive");
  data_.resize(3 * pixel_count());
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    data_[3 * i] = fill.r;
    data_[3 * i + 1] = fill.g;
    data_[3 * i + 2] = fill.b;
  }
}

Image::Image(int width, int height, std::vector<std::uint8_t> rgb)
    : width_(width), height_(height), data_(std::move(rgb)) {
  require(width > 0 && height > 0, "image dimensions must be positive");
  require(data_.size() == 3 * pixel_count(),
          "pixel buffer holds " + std::to_string(data_.size()) + " bytes, expected " +
              std::to_string(3 * pixel_count()));
}

std::size_t mask_area(const Mask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.values().begin(), mask.values().end(), [](std::uint8_t v) { return v != 0; }));
}

Mask mask_union(std::span<const Mask> masks, int width, int height) {
  Mask out(width, height, 0);
  for (const Mask& m : masks) {
    require(m.width() == width && m.height() == height, "mask dimensions differ");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] != 0 || m[i] != 0) ? 1 : 0;
  }
  return out;
}

}  // namespace dlo
