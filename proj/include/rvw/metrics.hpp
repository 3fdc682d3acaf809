#pragma once

// Quality and rate metrics, and the rate-distortion sweep harness.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rvw/error.hpp"
#include "rvw/image.hpp"
#include "rvw/parallel.hpp"
#include "rvw/rgft_codec.hpp"

namespace rvw {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

struct SquaredError {
  double sum = 0.0;
  std::size_t count = 0;
};

template <class T>
SquaredError squared_error(const Raster<T>& a, const Raster<T>& b) {
  if (!a.same_shape(b)) fail(ErrorCode::kDimensionMismatch, "planes differ in size");
  SquaredError e;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.samples()[i]) - static_cast<double>(b.samples()[i]);
    e.sum += d * d;
  }
  e.count = a.size();
  return e;
}

inline double psnr_from(double sse, std::size_t count, double peak) {
  if (count == 0 || sse == 0.0) return kInfinity;
  return 10.0 * std::log10(peak * peak / (sse / static_cast<double>(count)));
}

}  // namespace detail

// 10 log10(peak^2 / MSE); +inf when the planes are identical.
template <class T>
double psnr(const Raster<T>& a, const Raster<T>& b, double peak = 255.0) {
  const auto e = detail::squared_error(a, b);
  return detail::psnr_from(e.sum, e.count, peak);
}

struct RegionPsnr {
  double whole = kInfinity;    // PSNR_I
  double non_roi = kInfinity;  // PSNR_N
  double roi = kInfinity;      // PSNR_W
};

struct RegionErrors {
  double sse_whole = 0.0, sse_non_roi = 0.0, sse_roi = 0.0;
  std::size_t n_whole = 0, n_non_roi = 0, n_roi = 0;
};

inline RegionErrors region_errors(const GrayPlane& before, const GrayPlane& after, const Roi& roi) {
  if (!before.same_shape(after)) fail(ErrorCode::kDimensionMismatch, "planes differ in size");
  require_roi(roi, before.width(), before.height());
  RegionErrors e;
  for (int y = 0; y < before.height(); ++y) {
    for (int x = 0; x < before.width(); ++x) {
      const double d = static_cast<double>(before(x, y)) - static_cast<double>(after(x, y));
      if (roi.contains(x, y)) {
        e.sse_roi += d * d;
        ++e.n_roi;
      } else {
        e.sse_non_roi += d * d;
        ++e.n_non_roi;
      }
    }
  }
  e.sse_whole = e.sse_roi + e.sse_non_roi;
  e.n_whole = e.n_roi + e.n_non_roi;
  return e;
}

inline RegionPsnr psnr_regions(const GrayPlane& before, const GrayPlane& after, const Roi& roi) {
  const auto e = region_errors(before, after, roi);
  return {detail::psnr_from(e.sse_whole, e.n_whole, 255.0),
          detail::psnr_from(e.sse_non_roi, e.n_non_roi, 255.0),
          detail::psnr_from(e.sse_roi, e.n_roi, 255.0)};
}

// Color: arithmetic mean of the per-channel values (an infinite channel
// makes the mean infinite).
inline RegionPsnr psnr_regions(const ColorImage& before, const ColorImage& after, const Roi& roi) {
  RegionPsnr sum{0.0, 0.0, 0.0};
  for (int c = 0; c < 3; ++c) {
    const auto p = psnr_regions(before.channels[c], after.channels[c], roi);
    sum.whole += p.whole;
    sum.non_roi += p.non_roi;
    sum.roi += p.roi;
  }
  return {sum.whole / 3.0, sum.non_roi / 3.0, sum.roi / 3.0};
}

// Bits needed to store a w x h plane of 8-bit samples.
inline std::uint64_t raw_bits(int width, int height) {
  if (width <= 0 || height <= 0) fail(ErrorCode::kInvalidArgument, "dimensions must be positive");
  return static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height) * 8u;
}

inline double compression_ratio(double n_c, double n_d) {
  if (n_d <= 0.0) fail(ErrorCode::kDivisionByZero, "n_d must be positive");
  return n_c / n_d;
}

struct RdPoint {
  double mu = 0.0;
  int qp = 0;
  double rate_bits = 0.0;  // averaged over the corpus
  double psnr_db = 0.0;    // averaged PSNR(D', D)
};

struct CorpusItem {
  Image host;
  Image watermarked;
  Roi roi;
};

// Difference planes of a corpus item, one per channel.
inline std::vector<DifferencePlane> difference_planes(const CorpusItem& item) {
  if (item.host.index() != item.watermarked.index()) {
    fail(ErrorCode::kDimensionMismatch, "host and watermarked differ in channel count");
  }
  if (const auto* gray = std::get_if<GrayPlane>(&item.host)) {
    return {difference(*gray, std::get<GrayPlane>(item.watermarked), item.roi)};
  }
  const auto& h = std::get<ColorImage>(item.host);
  const auto& w = std::get<ColorImage>(item.watermarked);
  std::vector<DifferencePlane> planes;
  for (int c = 0; c < 3; ++c) planes.push_back(difference(h.channels[c], w.channels[c], item.roi));
  return planes;
}

// Every (mu, qp) pair encodes every plane of the corpus with mu pinned; bits
// and PSNR(D', D) are averaged over planes. Rows follow mu-major order.
inline std::vector<RdPoint> rd_sweep(std::span<const CorpusItem> corpus, std::span<const double> mu_values,
                                     std::span<const int> qp_values, CodecParams base = {}) {
  if (corpus.empty()) fail(ErrorCode::kInvalidArgument, "empty corpus");
  std::vector<std::pair<DifferencePlane, Roi>> planes;
  for (const auto& item : corpus) {
    for (auto& d : difference_planes(item)) planes.emplace_back(std::move(d), item.roi);
  }
  std::vector<RdPoint> points;
  for (double mu : mu_values) {
    for (int qp : qp_values) {
      CodecParams params = base;
      params.mu_grid = {mu};
      params.qp = qp;
      std::vector<double> bits(planes.size());
      std::vector<double> quality(planes.size());
      parallel_for(planes.size(), [&](std::size_t i) {
        const auto result = encode(planes[i].first, planes[i].second, params);
        bits[i] = static_cast<double>(result.cost.rate_bits);
        quality[i] = psnr(planes[i].first, result.reconstructed, 255.0);
      });
      RdPoint p{mu, qp, 0.0, 0.0};
      for (std::size_t i = 0; i < planes.size(); ++i) {
        p.rate_bits += bits[i];
        p.psnr_db += quality[i];
      }
      p.rate_bits /= static_cast<double>(planes.size());
      p.psnr_db /= static_cast<double>(planes.size());
      points.push_back(p);
    }
  }
  return points;
}

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string rd_csv(std::span<const RdPoint> points) {
  std::string out = "mu,qp,avg_bits,avg_psnr\n";
  for (const auto& p : points) {
    out += format_number(p.mu) + "," + std::to_string(p.qp) + "," + format_number(p.rate_bits) + "," +
           format_number(p.psnr_db) + "\n";
  }
  return out;
}

}  // namespace rvw
