#pragma once

// Reference visible embedding (alpha fusion) and error compensation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

#include "rvw/error.hpp"
#include "rvw/image.hpp"

namespace rvw {

struct AlphaParams {
  double alpha = 0.5;
  Roi roi;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::kInvalidArgument, "alpha must lie in (0,1)");
  }
};

// Inside the ROI: round((1 - alpha) * host + alpha * watermark), half away
// from zero. Outside the ROI the host is copied.
inline GrayPlane alpha_embed(const GrayPlane& host, const GrayPlane& watermark,
                             const AlphaParams& params) {
  params.validate();
  require_roi(params.roi, host.width(), host.height());
  if (watermark.width() != params.roi.width || watermark.height() != params.roi.height) {
    fail(ErrorCode::kDimensionMismatch, "watermark must match roi dimensions");
  }
  GrayPlane out = host;
  const Roi& r = params.roi;
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      const double v = (1.0 - params.alpha) * host(r.x0 + x, r.y0 + y) + params.alpha * watermark(x, y);
      out(r.x0 + x, r.y0 + y) = static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
    }
  }
  return out;
}

struct Compensated {
  GrayPlane image;
  OverflowList overflow;
};

// I^w' = I^w + e inside the ROI. Sums outside 0..255 are stored clamped and
// the remainder (true - stored) is recorded in raster order.
inline Compensated compensate(const GrayPlane& watermarked, const Raster<std::int16_t>& error,
                              const Roi& roi) {
  require_roi(roi, watermarked.width(), watermarked.height());
  if (error.width() != roi.width || error.height() != roi.height) {
    fail(ErrorCode::kDimensionMismatch, "error plane must match roi dimensions");
  }
  Compensated out{watermarked, {}};
  for (int y = 0; y < roi.height; ++y) {
    for (int x = 0; x < roi.width; ++x) {
      const int s = int{watermarked(roi.x0 + x, roi.y0 + y)} + error(x, y);
      const int stored = std::clamp(s, 0, 255);
      out.image(roi.x0 + x, roi.y0 + y) = static_cast<std::uint8_t>(stored);
      if (s != stored) {
        out.overflow.push_back({static_cast<std::uint16_t>(roi.x0 + x),
                                static_cast<std::uint16_t>(roi.y0 + y),
                                static_cast<std::int16_t>(s - stored)});
      }
    }
  }
  return out;
}

// e = D - D'
inline ErrorPlane error_plane(const Raster<std::int16_t>& original,
                              const Raster<std::int16_t>& reconstructed) {
  if (!original.same_shape(reconstructed)) {
    fail(ErrorCode::kDimensionMismatch, "planes differ in size");
  }
  ErrorPlane e(original.width(), original.height());
  for (std::size_t i = 0; i < e.size(); ++i) {
    e.samples()[i] = static_cast<std::int16_t>(original.samples()[i] - reconstructed.samples()[i]);
  }
  return e;
}

}  // namespace rvw
