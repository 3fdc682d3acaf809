#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rvw/error.hpp"

namespace rvw {

// Row-major raster with top-left origin.
template <class T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      fail(ErrorCode::kInvalidArgument, "negative raster dimensions");
    }
    samples_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Raster(int width, int height, std::vector<T> samples)
      : width_(width), height_(height), samples_(std::move(samples)) {
    if (width < 0 || height < 0 ||
        samples_.size() != static_cast<std::size_t>(width) * height) {
      fail(ErrorCode::kDimensionMismatch,
           "sample count does not match width x height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  T& operator()(int x, int y) {
    return samples_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(int x, int y) const {
    return samples_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<T> samples() noexcept { return samples_; }
  std::span<const T> samples() const noexcept { return samples_; }

  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> samples_;
};

using GrayPlane = Raster<std::uint8_t>;
using RealPlane = Raster<double>;
// e = D - D' may reach -510..510, so it gets its own unchecked type.
using ErrorPlane = Raster<std::int16_t>;

inline constexpr int kMaxDifference = 255;

// Signed per-pixel difference over an ROI; every sample lies in -255..255.
class DifferencePlane : public Raster<std::int16_t> {
 public:
  DifferencePlane() = default;
  DifferencePlane(int width, int height) : Raster(width, height, 0) {}
  DifferencePlane(int width, int height, std::vector<std::int16_t> samples)
      : Raster(width, height, std::move(samples)) {
    for (auto v : this->samples()) {
      if (v < -kMaxDifference || v > kMaxDifference) {
        fail(ErrorCode::kRangeViolation, "difference sample outside -255..255");
      }
    }
  }

  friend bool operator==(const DifferencePlane&,
                         const DifferencePlane&) = default;
};

struct ColorImage {
  std::array<GrayPlane, 3> channels;

  ColorImage() = default;
  explicit ColorImage(std::array<GrayPlane, 3> planes)
      : channels(std::move(planes)) {
    if (!channels[0].same_shape(channels[1]) ||
        !channels[0].same_shape(channels[2])) {
      fail(ErrorCode::kDimensionMismatch, "color planes differ in size");
    }
  }
  ColorImage(int width, int height)
      : channels{GrayPlane(width, height), GrayPlane(width, height),
                 GrayPlane(width, height)} {}

  int width() const noexcept { return channels[0].width(); }
  int height() const noexcept { return channels[0].height(); }

  friend bool operator==(const ColorImage&, const ColorImage&) = default;
};

using Image = std::variant<GrayPlane, ColorImage>;

struct Roi {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  bool contains(int x, int y) const noexcept {
    return x >= x0 && y >= y0 && x < x0 + width && y < y0 + height;
  }
  bool fits(int plane_width, int plane_height) const noexcept {
    return width > 0 && height > 0 && x0 >= 0 && y0 >= 0 &&
           x0 + width <= plane_width && y0 + height <= plane_height;
  }
  std::size_t area() const noexcept {
    return static_cast<std::size_t>(width) * height;
  }

  friend bool operator==(const Roi&, const Roi&) = default;
};

inline std::string to_string(const Roi& roi) {
  return std::to_string(roi.x0) + "," + std::to_string(roi.y0) + "," +
         std::to_string(roi.width) + "," + std::to_string(roi.height);
}

inline void require_roi(const Roi& roi, int width, int height) {
  if (!roi.fits(width, height)) {
    fail(ErrorCode::kRoiOutOfBounds, "roi " + to_string(roi) +
                                         " out of bounds for " +
                                         std::to_string(width) + "x" +
                                         std::to_string(height) + " plane");
  }
}

// One pixel whose compensated value left 0..255. Coordinates are absolute
// image coordinates; residual = true value - stored (clamped) value.
struct OverflowEntry {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int16_t residual = 0;

  friend bool operator==(const OverflowEntry&, const OverflowEntry&) = default;
};

using OverflowList = std::vector<OverflowEntry>;

// D = (host - watermarked) restricted to the ROI.
inline DifferencePlane difference(const GrayPlane& host,
                                  const GrayPlane& watermarked,
                                  const Roi& roi) {
  if (!host.same_shape(watermarked)) {
    fail(ErrorCode::kDimensionMismatch, "host and watermarked differ in size");
  }
  require_roi(roi, host.width(), host.height());
  DifferencePlane out(roi.width, roi.height);
  for (int y = 0; y < roi.height; ++y) {
    for (int x = 0; x < roi.width; ++x) {
      out(x, y) = static_cast<std::int16_t>(
          int{host(roi.x0 + x, roi.y0 + y)} -
          int{watermarked(roi.x0 + x, roi.y0 + y)});
    }
  }
  return out;
}

// Inverse of difference(): out = watermarked + diff + overflow residual on the
// ROI. Any sum outside 0..255 is a RangeViolation; nothing is clamped.
inline GrayPlane apply_difference(const GrayPlane& watermarked,
                                  const Raster<std::int16_t>& diff,
                                  const Roi& roi,
                                  const OverflowList& overflow) {
  require_roi(roi, watermarked.width(), watermarked.height());
  if (diff.width() != roi.width || diff.height() != roi.height) {
    fail(ErrorCode::kDimensionMismatch, "difference plane does not match roi");
  }
  Raster<int> sum(roi.width, roi.height);
  for (int y = 0; y < roi.height; ++y) {
    for (int x = 0; x < roi.width; ++x) {
      sum(x, y) = int{watermarked(roi.x0 + x, roi.y0 + y)} + diff(x, y);
    }
  }
  for (const auto& entry : overflow) {
    if (!roi.contains(entry.x, entry.y)) {
      fail(ErrorCode::kRangeViolation, "overflow entry outside roi");
    }
    sum(entry.x - roi.x0, entry.y - roi.y0) += entry.residual;
  }
  GrayPlane out = watermarked;
  for (int y = 0; y < roi.height; ++y) {
    for (int x = 0; x < roi.width; ++x) {
      const int v = sum(x, y);
      if (v < 0 || v > 255) {
        fail(ErrorCode::kRangeViolation,
             "restored sample " + std::to_string(v) + " at (" +
                 std::to_string(roi.x0 + x) + "," +
                 std::to_string(roi.y0 + y) + ") leaves 0..255");
      }
      out(roi.x0 + x, roi.y0 + y) = static_cast<std::uint8_t>(v);
    }
  }
  return out;
}

}  // namespace rvw
