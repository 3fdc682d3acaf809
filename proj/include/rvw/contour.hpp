#pragma once

// Contour detection on the smoothed difference plane and lossless chain
// coding of the resulting edge-flag raster.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rvw/error.hpp"
#include "rvw/image.hpp"
#include "rvw/range_coder.hpp"

namespace rvw {

inline constexpr double kDefaultContourThreshold = 16.0;

// Chain directions, 0 = east then clockwise in image coordinates (y down).
inline constexpr std::array<int, 8> kChainDx = {1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr std::array<int, 8> kChainDy = {0, 1, 1, 1, 0, -1, -1, -1};

struct Chain {
  int x = 0;
  int y = 0;
  std::vector<std::uint8_t> moves;  // each in 0..7

  friend bool operator==(const Chain&, const Chain&) = default;
};

struct ContourMap {
  Raster<std::uint8_t> flags;  // 1 = contour pixel
  std::vector<Chain> chains;

  int width() const { return flags.width(); }
  int height() const { return flags.height(); }

  // Pixels outside the map read as unflagged.
  bool flagged(int x, int y) const {
    return x >= 0 && y >= 0 && x < flags.width() && y < flags.height() && flags(x, y) != 0;
  }
};

// Greedy 8-connected tracing: raster-order starts, first unvisited neighbour
// in direction order. Every flagged pixel lands in exactly one chain.
inline std::vector<Chain> trace_chains(const Raster<std::uint8_t>& flags) {
  Raster<std::uint8_t> visited(flags.width(), flags.height(), 0);
  std::vector<Chain> chains;
  for (int y = 0; y < flags.height(); ++y) {
    for (int x = 0; x < flags.width(); ++x) {
      if (!flags(x, y) || visited(x, y)) continue;
      Chain chain{x, y, {}};
      visited(x, y) = 1;
      int cx = x;
      int cy = y;
      for (;;) {
        int dir = -1;
        for (int d = 0; d < 8; ++d) {
          const int nx = cx + kChainDx[d];
          const int ny = cy + kChainDy[d];
          if (nx >= 0 && ny >= 0 && nx < flags.width() && ny < flags.height() &&
              flags(nx, ny) && !visited(nx, ny)) {
            dir = d;
            break;
          }
        }
        if (dir < 0) break;
        cx += kChainDx[dir];
        cy += kChainDy[dir];
        visited(cx, cy) = 1;
        chain.moves.push_back(static_cast<std::uint8_t>(dir));
      }
      chains.push_back(std::move(chain));
    }
  }
  return chains;
}

inline Raster<std::uint8_t> render_chains(int width, int height,
                                          std::span<const Chain> chains) {
  Raster<std::uint8_t> flags(width, height, 0);
  for (const auto& chain : chains) {
    int x = chain.x;
    int y = chain.y;
    auto mark = [&] {
      if (x < 0 || y < 0 || x >= width || y >= height) {
        fail(ErrorCode::kCorruptStream, "contour chain leaves the plane");
      }
      flags(x, y) = 1;
    };
    mark();
    for (auto m : chain.moves) {
      if (m > 7) fail(ErrorCode::kCorruptStream, "bad chain direction");
      x += kChainDx[m];
      y += kChainDy[m];
      mark();
    }
  }
  return flags;
}

// A pixel is a contour pixel when its larger forward difference (right or
// down neighbour) exceeds the threshold. Missing neighbours count as 0.
inline ContourMap detect_contours(const RealPlane& plane,
                                  double threshold = kDefaultContourThreshold) {
  ContourMap map;
  map.flags = Raster<std::uint8_t>(plane.width(), plane.height(), 0);
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x < plane.width(); ++x) {
      double g = 0.0;
      if (x + 1 < plane.width()) g = std::abs(plane(x + 1, y) - plane(x, y));
      if (y + 1 < plane.height()) g = std::max(g, std::abs(plane(x, y + 1) - plane(x, y)));
      if (g > threshold) map.flags(x, y) = 1;
    }
  }
  map.chains = trace_chains(map.flags);
  return map;
}

namespace detail {

inline int bits_for(int extent) {
  return extent <= 1 ? 0 : std::bit_width(static_cast<unsigned>(extent - 1));
}

struct ContourModels {
  std::array<BitTree<3>, 9> moves{};  // context: previous move, 8 = none
  std::array<BitModel, 24> length_prefix{};
};

}  // namespace detail

// Stream: varint chain count; if nonzero, one range-coded body holding per
// chain its start (fixed-width bypass bits), move count (exp-Golomb) and
// moves (3-level tree conditioned on the previous move).
inline std::vector<std::uint8_t> encode_contours(const ContourMap& map) {
  ByteWriter out;
  out.varint(map.chains.size());
  if (map.chains.empty()) return out.take();
  RangeEncoder enc;
  detail::ContourModels models;
  const int xbits = detail::bits_for(map.width());
  const int ybits = detail::bits_for(map.height());
  for (const auto& chain : map.chains) {
    enc.encode_bypass_bits(static_cast<std::uint32_t>(chain.x), xbits);
    enc.encode_bypass_bits(static_cast<std::uint32_t>(chain.y), ybits);
    put_exp_golomb(enc, models.length_prefix,
                   static_cast<std::uint32_t>(chain.moves.size()));
    int prev = 8;
    for (auto m : chain.moves) {
      models.moves[prev].encode(enc, m);
      prev = m;
    }
  }
  out.bytes(enc.finish());
  return out.take();
}

inline ContourMap decode_contours(std::span<const std::uint8_t> bytes, int width,
                                  int height) {
  ByteReader in(bytes);
  const std::uint64_t count = in.varint();
  const std::uint64_t pixels = static_cast<std::uint64_t>(width) * height;
  if (count > pixels) fail(ErrorCode::kCorruptStream, "contour count exceeds plane size");
  ContourMap map;
  if (count == 0) {
    if (in.remaining() != 0) fail(ErrorCode::kCorruptStream, "trailing contour bytes");
    map.flags = Raster<std::uint8_t>(width, height, 0);
    return map;
  }
  RangeDecoder dec(bytes.subspan(in.position()));
  detail::ContourModels models;
  const int xbits = detail::bits_for(width);
  const int ybits = detail::bits_for(height);
  for (std::uint64_t c = 0; c < count; ++c) {
    Chain chain;
    chain.x = static_cast<int>(dec.decode_bypass_bits(xbits));
    chain.y = static_cast<int>(dec.decode_bypass_bits(ybits));
    if (chain.x >= width || chain.y >= height) {
      fail(ErrorCode::kCorruptStream, "chain start outside plane");
    }
    const std::uint32_t length = get_exp_golomb(dec, models.length_prefix, 31);
    if (length >= pixels) fail(ErrorCode::kCorruptStream, "chain longer than plane");
    int prev = 8;
    for (std::uint32_t i = 0; i < length; ++i) {
      const auto m = static_cast<std::uint8_t>(models.moves[prev].decode(dec));
      chain.moves.push_back(m);
      prev = m;
    }
    map.chains.push_back(std::move(chain));
  }
  map.flags = render_chains(width, height, map.chains);
  return map;
}

}  // namespace rvw
