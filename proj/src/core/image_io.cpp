#include "dlo/image_io.hpp"

#include <array>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace dlo {
namespace {

Image from_bgr(const cv::Mat& decoded) {
  cv::Mat bgr;
  if (decoded.channels() == 1) {
    cv::Mat channels[] = {decoded, decoded, decoded};
    cv::merge(channels, 3, bgr);
  } else if (decoded.channels() == 4) {
    cv::Mat parts[4];
    cv::split(decoded, parts);
    cv::Mat channels[] = {parts[0], parts[1], parts[2]};
    cv::merge(channels, 3, bgr);
  } else {
    bgr = decoded;
  }
  if (bgr.depth() != CV_8U) {
    // 16-bit inputs are outside the supported range.
    fail(ErrorCode::bad_image, "only 8-bit images are supported");
  }
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(bgr.rows) * bgr.cols * 3);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      const std::size_t i = 3 * (static_cast<std::size_t>(y) * bgr.cols + x);
      rgb[i] = row[x][2];
      rgb[i + 1] = row[x][1];
      rgb[i + 2] = row[x][0];
    }
  }
  return Image(bgr.cols, bgr.rows, std::move(rgb));
}

cv::Mat to_bgr(const Image& image) {
  cv::Mat out(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = out.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      const Rgb c = image.at(x, y);
      row[x] = cv::Vec3b(c.b, c.g, c.r);
    }
  }
  return out;
}

cv::Mat to_gray(const Mask& mask) {
  cv::Mat out(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = out.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = mask(x, y) ? 255 : 0;
  }
  return out;
}

std::vector<std::uint8_t> encode(const cv::Mat& mat) {
  std::vector<std::uint8_t> buffer;
  if (!cv::imencode(".png", mat, buffer)) fail(ErrorCode::io, "png encoding failed");
  return buffer;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "write failed: " + path.string());
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  cv::Mat decoded = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (decoded.empty()) fail(ErrorCode::bad_image, "cannot decode image " + path.string());
  return from_bgr(decoded);
}

Image decode_image(std::span<const std::uint8_t> encoded) {
  if (encoded.empty()) fail(ErrorCode::bad_image, "empty image payload");
  const cv::Mat raw(1, static_cast<int>(encoded.size()), CV_8UC1, const_cast<std::uint8_t*>(encoded.data()));
  cv::Mat decoded = cv::imdecode(raw, cv::IMREAD_UNCHANGED);
  if (decoded.empty()) fail(ErrorCode::bad_image, "cannot decode image payload");
  return from_bgr(decoded);
}

std::vector<std::uint8_t> encode_png(const Image& image) { return encode(to_bgr(image)); }

std::vector<std::uint8_t> encode_mask_png(const Mask& mask) { return encode(to_gray(mask)); }

void write_png(const std::filesystem::path& path, const Image& image) {
  write_bytes(path, encode_png(image));
}

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
  write_bytes(path, encode_mask_png(mask));
}

void write_label_png(const std::filesystem::path& path, const LabelField& labels) {
  cv::Mat out(labels.height(), labels.width(), CV_16UC1);
  for (int y = 0; y < labels.height(); ++y) {
    auto* row = out.ptr<std::uint16_t>(y);
    for (int x = 0; x < labels.width(); ++x) {
      const std::int32_t v = labels(x, y);
      require(v >= 0 && v <= 0xFFFF, "label does not fit in 16 bits");
      row[x] = static_cast<std::uint16_t>(v);
    }
  }
  write_bytes(path, encode(out));
}

Mask read_mask(const std::filesystem::path& path) {
  cv::Mat decoded = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (decoded.empty()) fail(ErrorCode::bad_image, "cannot decode mask " + path.string());
  Mask mask(decoded.cols, decoded.rows, 0);
  for (int y = 0; y < decoded.rows; ++y) {
    const auto* row = decoded.ptr<std::uint8_t>(y);
    for (int x = 0; x < decoded.cols; ++x) mask(x, y) = row[x] != 0 ? 1 : 0;
  }
  return mask;
}

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(4 * ((bytes.size() + 2) / 3));
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (int i = 0; i < 64; ++i) lookup[static_cast<unsigned char>(kAlphabet[i])] = i;

  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=') break;
    const int v = lookup[static_cast<unsigned char>(ch)];
    if (v < 0) {
      if (ch == '\n' || ch == '\r' || ch == ' ') continue;
      fail(ErrorCode::invalid_argument, "invalid base64 character");
    }
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

}  // namespace dlo
