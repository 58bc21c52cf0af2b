#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dlo/image.hpp"

namespace dlo {

// PNG / JPEG decoding to 8-bit RGB; alpha is discarded. Throws ErrorCode::bad_image.
Image read_image(const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> encoded);

std::vector<std::uint8_t> encode_png(const Image& image);
// Single-channel 8-bit PNG; nonzero mask values become 255.
std::vector<std::uint8_t> encode_mask_png(const Mask& mask);

void write_png(const std::filesystem::path& path, const Image& image);
void write_mask_png(const std::filesystem::path& path, const Mask& mask);
// 16-bit label field for debugging; labels must fit in uint16.
void write_label_png(const std::filesystem::path& path, const LabelField& labels);

// Any pixel with nonzero intensity is foreground.
Mask read_mask(const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace dlo
