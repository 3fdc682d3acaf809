#pragma once

// Histogram-shift reversible data hiding over the non-ROI region.
//
// The first 144 pixels in raster order form a reserve whose LSBs carry the
// embedding parameters, so the extractor can locate everything blindly:
//   bits   0..7   peak intensity
//   bits   8..15  zero-bin intensity
//   bits  16..47  payload length in bits
//   bits  48..55  format version
//   bits  56..79  reserved (0)
//   bits  80..143 roi x0, y0, width, height (16 bits each)
// Fields are written least-significant bit first. The reserve pixels must lie
// outside the ROI; their original LSBs travel at the head of the embedded bit
// sequence. All remaining non-ROI pixels ("cover") are scanned in raster order.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <vector>

#include "rvw/error.hpp"
#include "rvw/image.hpp"

namespace rvw {

using BitString = std::vector<std::uint8_t>;  // one 0/1 entry per bit

inline constexpr int kReservePixels = 144;
inline constexpr std::uint8_t kRdhVersion = 1;

struct RdhRecord {
  std::uint8_t peak = 0;
  std::uint8_t zero = 0;
  std::uint32_t payload_bits = 0;
  std::uint8_t version = kRdhVersion;
  std::uint32_t reserved = 0;
  Roi roi;
};

inline BitString bytes_to_bits(std::span<const std::uint8_t> bytes) {
  BitString bits;
  bits.reserve(bytes.size() * 8);
  for (auto b : bytes) {
    for (int i = 0; i < 8; ++i) bits.push_back((b >> i) & 1u);
  }
  return bits;
}

inline std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
  if (bits.size() % 8 != 0) fail(ErrorCode::kMalformedHeader, "bit count not a whole number of bytes");
  std::vector<std::uint8_t> bytes(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bytes[i / 8] |= static_cast<std::uint8_t>((bits[i] & 1u) << (i % 8));
  }
  return bytes;
}

namespace detail {

inline bool is_cover(const GrayPlane& plane, const Roi& roi, std::size_t index) {
  const int x = static_cast<int>(index % plane.width());
  const int y = static_cast<int>(index / plane.width());
  return index >= kReservePixels && !roi.contains(x, y);
}

inline std::size_t non_roi_count(const GrayPlane& plane, const Roi& roi) {
  return plane.size() - roi.area();
}

struct PeakZero {
  int peak = 0;
  std::size_t peak_count = 0;
  std::optional<int> zero;
};

// Peak: most frequent cover value (lowest on ties). Zero: an empty cover bin
// nearest the peak, preferring the upper side on ties.
inline PeakZero find_peak_zero(const GrayPlane& plane, const Roi& roi) {
  std::array<std::size_t, 256> hist{};
  for (std::size_t i = kReservePixels; i < plane.size(); ++i) {
    if (is_cover(plane, roi, i)) ++hist[plane.samples()[i]];
  }
  PeakZero pz;
  for (int v = 0; v < 256; ++v) {
    if (hist[v] > pz.peak_count) {
      pz.peak = v;
      pz.peak_count = hist[v];
    }
  }
  for (int dist = 1; dist < 256; ++dist) {
    if (pz.peak + dist < 256 && hist[pz.peak + dist] == 0) {
      pz.zero = pz.peak + dist;
      break;
    }
    if (pz.peak - dist >= 0 && hist[pz.peak - dist] == 0) {
      pz.zero = pz.peak - dist;
      break;
    }
  }
  return pz;
}

inline bool reserve_clear_of_roi(const GrayPlane& plane, const Roi& roi) {
  if (plane.size() < kReservePixels) return false;
  for (std::size_t i = 0; i < kReservePixels; ++i) {
    if (roi.contains(static_cast<int>(i % plane.width()), static_cast<int>(i / plane.width()))) {
      return false;
    }
  }
  return true;
}

inline void put_field(BitString& bits, std::uint32_t value, int width) {
  for (int i = 0; i < width; ++i) bits.push_back((value >> i) & 1u);
}

inline std::uint32_t get_field(std::span<const std::uint8_t> bits, std::size_t& pos, int width) {
  std::uint32_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint32_t>(bits[pos++] & 1u) << i;
  return v;
}

}  // namespace detail

// Payload bits that fit: cover count at the peak minus the reserve LSBs that
// ride along. Zero when there are too few non-ROI pixels.
inline std::size_t rdh_capacity(const GrayPlane& plane, const Roi& roi) {
  require_roi(roi, plane.width(), plane.height());
  if (detail::non_roi_count(plane, roi) < kReservePixels) return 0;
  const auto pz = detail::find_peak_zero(plane, roi);
  return pz.peak_count > kReservePixels ? pz.peak_count - kReservePixels : 0;
}

inline RdhRecord rdh_read_header(const GrayPlane& plane) {
  if (plane.size() < kReservePixels) fail(ErrorCode::kMalformedHeader, "image smaller than reserve");
  BitString bits(kReservePixels);
  for (int i = 0; i < kReservePixels; ++i) bits[i] = plane.samples()[i] & 1u;
  std::size_t pos = 0;
  RdhRecord rec;
  rec.peak = static_cast<std::uint8_t>(detail::get_field(bits, pos, 8));
  rec.zero = static_cast<std::uint8_t>(detail::get_field(bits, pos, 8));
  rec.payload_bits = detail::get_field(bits, pos, 32);
  rec.version = static_cast<std::uint8_t>(detail::get_field(bits, pos, 8));
  rec.reserved = detail::get_field(bits, pos, 24);
  rec.roi.x0 = static_cast<int>(detail::get_field(bits, pos, 16));
  rec.roi.y0 = static_cast<int>(detail::get_field(bits, pos, 16));
  rec.roi.width = static_cast<int>(detail::get_field(bits, pos, 16));
  rec.roi.height = static_cast<int>(detail::get_field(bits, pos, 16));
  return rec;
}

inline Roi rdh_read_roi(const GrayPlane& plane) {
  const RdhRecord rec = rdh_read_header(plane);
  if (rec.version != kRdhVersion) fail(ErrorCode::kBadVersion, "rdh version " + std::to_string(rec.version));
  if (!rec.roi.fits(plane.width(), plane.height())) fail(ErrorCode::kMalformedHeader, "stored roi out of bounds");
  return rec.roi;
}

inline GrayPlane rdh_embed(const GrayPlane& plane, const Roi& roi, std::span<const std::uint8_t> payload) {
  require_roi(roi, plane.width(), plane.height());
  if (detail::non_roi_count(plane, roi) < kReservePixels) {
    fail(ErrorCode::kNoCoverRegion, "fewer than 144 pixels outside the roi");
  }
  if (!detail::reserve_clear_of_roi(plane, roi)) {
    fail(ErrorCode::kReserveConflict, "roi overlaps the first 144 pixels (parameter reserve)");
  }
  if (roi.x0 > 0xFFFF || roi.y0 > 0xFFFF || roi.width > 0xFFFF || roi.height > 0xFFFF) {
    fail(ErrorCode::kInvalidArgument, "roi not representable in 16-bit fields");
  }
  const auto pz = detail::find_peak_zero(plane, roi);
  const std::size_t capacity = pz.peak_count > kReservePixels ? pz.peak_count - kReservePixels : 0;
  if (pz.peak_count < kReservePixels && payload.empty()) {
    // the reserve LSBs alone do not fit
    fail(ErrorCode::kNoCoverRegion, "peak bin holds fewer than 144 cover pixels");
  }
  if (payload.size() > capacity) {
    fail(ErrorCode::kCapacityExceeded, std::to_string(payload.size()) + " payload bits exceed capacity " +
                                           std::to_string(capacity));
  }
  if (!pz.zero) fail(ErrorCode::kNoZeroBin, "every intensity occurs outside the roi");

  BitString body;
  body.reserve(kReservePixels + payload.size());
  for (int i = 0; i < kReservePixels; ++i) body.push_back(plane.samples()[i] & 1u);
  for (auto b : payload) body.push_back(b & 1u);

  const int peak = pz.peak;
  const int zero = *pz.zero;
  const int dir = zero > peak ? 1 : -1;
  GrayPlane out = plane;
  auto s = out.samples();
  std::size_t next = 0;
  for (std::size_t i = kReservePixels; i < out.size(); ++i) {
    if (!detail::is_cover(out, roi, i)) continue;
    const int v = s[i];
    if (v == peak) {
      if (next < body.size() && body[next++]) s[i] = static_cast<std::uint8_t>(v + dir);
    } else if ((v - peak) * dir > 0 && (zero - v) * dir > 0) {
      s[i] = static_cast<std::uint8_t>(v + dir);
    }
  }

  BitString header;
  detail::put_field(header, static_cast<std::uint32_t>(peak), 8);
  detail::put_field(header, static_cast<std::uint32_t>(zero), 8);
  detail::put_field(header, static_cast<std::uint32_t>(payload.size()), 32);
  detail::put_field(header, kRdhVersion, 8);
  detail::put_field(header, 0, 24);
  detail::put_field(header, static_cast<std::uint32_t>(roi.x0), 16);
  detail::put_field(header, static_cast<std::uint32_t>(roi.y0), 16);
  detail::put_field(header, static_cast<std::uint32_t>(roi.width), 16);
  detail::put_field(header, static_cast<std::uint32_t>(roi.height), 16);
  for (int i = 0; i < kReservePixels; ++i) s[i] = static_cast<std::uint8_t>((s[i] & 0xFEu) | header[i]);
  return out;
}

struct RdhExtraction {
  BitString payload;
  GrayPlane restored;
};

inline RdhExtraction rdh_extract(const GrayPlane& plane, const Roi& roi) {
  require_roi(roi, plane.width(), plane.height());
  const RdhRecord rec = rdh_read_header(plane);
  if (rec.version != kRdhVersion) fail(ErrorCode::kBadVersion, "rdh version " + std::to_string(rec.version));
  if (rec.reserved != 0 || rec.peak == rec.zero) fail(ErrorCode::kMalformedHeader, "inconsistent rdh header");
  if (rec.roi != roi) fail(ErrorCode::kMalformedHeader, "stored roi differs from requested roi");
  if (!detail::reserve_clear_of_roi(plane, roi)) fail(ErrorCode::kMalformedHeader, "roi overlaps reserve");
  const std::size_t cover = detail::non_roi_count(plane, roi) - kReservePixels;
  const std::size_t needed = kReservePixels + static_cast<std::size_t>(rec.payload_bits);
  if (rec.payload_bits > cover) fail(ErrorCode::kMalformedHeader, "payload length exceeds cover");

  const int peak = rec.peak;
  const int zero = rec.zero;
  const int dir = zero > peak ? 1 : -1;
  RdhExtraction out{{}, plane};
  BitString body;
  body.reserve(needed);
  auto s = out.restored.samples();
  for (std::size_t i = kReservePixels; i < s.size(); ++i) {
    if (!detail::is_cover(plane, roi, i)) continue;
    const int v = s[i];
    if (v == peak) {
      if (body.size() < needed) body.push_back(0);
    } else if (v == peak + dir) {
      if (body.size() < needed) body.push_back(1);
      s[i] = static_cast<std::uint8_t>(peak);
    } else if ((v - peak - dir) * dir > 0 && (zero - v) * dir >= 0) {
      s[i] = static_cast<std::uint8_t>(v - dir);
    }
  }
  if (body.size() < needed) fail(ErrorCode::kMalformedHeader, "cover holds fewer bits than announced");
  for (int i = 0; i < kReservePixels; ++i) s[i] = static_cast<std::uint8_t>((s[i] & 0xFEu) | body[i]);
  out.payload.assign(body.begin() + kReservePixels, body.end());
  return out;
}

}  // namespace rvw
