#pragma once

// Contour-aware intra prediction and block reconstruction. Both the encoder
// and the decoder run exactly this code on identical inputs.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "rvw/contour.hpp"
#include "rvw/image.hpp"
#include "rvw/transform.hpp"

namespace rvw {

using BlockValues = std::array<int, kBlockPixels>;

// Two 4-adjacent pixels are connected unless a contour separates them, i.e.
// exactly one of the two carries a contour flag.
inline bool connected(const ContourMap& contours, int x0, int y0, int x1, int y1) {
  return contours.flagged(x0, y0) == contours.flagged(x1, y1);
}

// Predicts the block at pixel origin (ox, oy) from the reconstructed row above
// and column to its left. Each pixel copies the boundary pixel it is reached
// from first by a breadth-first search that never crosses a contour; sources
// are queued top row left-to-right, then left column top-to-bottom. Pixels
// that no source reaches predict 0.
inline BlockValues intra_predict(int ox, int oy, const Raster<int>& reconstructed,
                                 const ContourMap& contours) {
  BlockValues pred{};
  std::array<bool, kBlockPixels> done{};
  struct Node {
    int x, y, value;
  };
  std::deque<Node> queue;
  if (oy > 0) {
    for (int i = 0; i < kBlock; ++i) queue.push_back({ox + i, oy - 1, reconstructed(ox + i, oy - 1)});
  }
  if (ox > 0) {
    for (int i = 0; i < kBlock; ++i) queue.push_back({ox - 1, oy + i, reconstructed(ox - 1, oy + i)});
  }
  static constexpr int kDx[4] = {1, 0, -1, 0};
  static constexpr int kDy[4] = {0, 1, 0, -1};
  while (!queue.empty()) {
    const Node node = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      const int nx = node.x + kDx[d];
      const int ny = node.y + kDy[d];
      const int lx = nx - ox;
      const int ly = ny - oy;
      if (lx < 0 || ly < 0 || lx >= kBlock || ly >= kBlock) continue;
      const int idx = ly * kBlock + lx;
      if (done[idx] || !connected(contours, node.x, node.y, nx, ny)) continue;
      done[idx] = true;
      pred[idx] = node.value;
      queue.push_back({nx, ny, node.value});
    }
  }
  return pred;
}

// Fills odd-coordinate pixels of an 8x8 residual whose even-coordinate pixels
// are known. Pixels with one odd coordinate average their known neighbours
// along that axis; odd/odd pixels then average their four neighbours. Only
// neighbours not separated by a contour count; if none qualify the first
// existing neighbour (left, up, right, down) is copied; otherwise 0.
inline std::array<double, kBlockPixels> upsample_residual(
    std::span<const double> low, int ox, int oy, const ContourMap& contours) {
  std::array<double, kBlockPixels> r{};
  std::array<bool, kBlockPixels> known{};
  for (int y = 0; y < kLowRes; ++y) {
    for (int x = 0; x < kLowRes; ++x) {
      r[(2 * y) * kBlock + 2 * x] = low[y * kLowRes + x];
      known[(2 * y) * kBlock + 2 * x] = true;
    }
  }
  static constexpr int kDx[4] = {-1, 0, 1, 0};
  static constexpr int kDy[4] = {0, -1, 0, 1};
  auto fill = [&](int x, int y, std::array<bool, kBlockPixels>& next_known) {
    double sum = 0.0;
    int count = 0;
    int fallback = -1;
    for (int d = 0; d < 4; ++d) {
      const int nx = x + kDx[d];
      const int ny = y + kDy[d];
      if (nx < 0 || ny < 0 || nx >= kBlock || ny >= kBlock || !known[ny * kBlock + nx]) continue;
      if (fallback < 0) fallback = ny * kBlock + nx;
      if (connected(contours, ox + x, oy + y, ox + nx, oy + ny)) {
        sum += r[ny * kBlock + nx];
        ++count;
      }
    }
    const int idx = y * kBlock + x;
    if (count > 0) {
      r[idx] = sum / count;
    } else if (fallback >= 0) {
      r[idx] = r[fallback];
    } else {
      r[idx] = 0.0;
    }
    next_known[idx] = true;
  };
  auto pass_known = known;
  for (int y = 0; y < kBlock; ++y) {
    for (int x = 0; x < kBlock; ++x) {
      if ((x % 2) + (y % 2) == 1) fill(x, y, pass_known);
    }
  }
  known = pass_known;
  for (int y = 1; y < kBlock; y += 2) {
    for (int x = 1; x < kBlock; x += 2) fill(x, y, pass_known);
  }
  return r;
}

// Reconstructs a residual from quantized levels for the signalled transform.
inline std::array<double, kBlockPixels> inverse_transform(
    std::span<const double> coefficients, TransformChoice choice, int ox, int oy,
    const ContourMap& contours) {
  if (choice.kind == TransformKind::kDctFull) return dct_inverse(coefficients);
  if (choice.template_id >= kTemplateCount) {
    fail(ErrorCode::kBadTemplate, "template id " + std::to_string(choice.template_id));
  }
  const auto low = gft_inverse(coefficients, template_bank()[choice.template_id]);
  return upsample_residual(low, ox, oy, contours);
}

// Final decoded samples: round(pred + residual), clamped to -255..255.
inline BlockValues reconstruct_block(const BlockValues& pred,
                                     std::span<const std::int32_t> levels,
                                     TransformChoice choice, int qp, int ox, int oy,
                                     const ContourMap& contours) {
  const auto coeffs = dequantize(levels, qp);
  const auto residual = inverse_transform(coeffs, choice, ox, oy, contours);
  BlockValues out{};
  for (int i = 0; i < kBlockPixels; ++i) {
    const long v = std::lround(pred[i] + residual[i]);
    out[i] = static_cast<int>(std::clamp<long>(v, -kMaxDifference, kMaxDifference));
  }
  return out;
}

}  // namespace rvw
