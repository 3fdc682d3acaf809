#pragma once

// Block transforms for the regularized GFT codec: the full-resolution 8x8
// orthonormal DCT-II and a bank of 4x4 low-resolution graph transforms, plus
// the scalar quantizer.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rvw/error.hpp"
#include "rvw/spectral_graph.hpp"

namespace rvw {

inline constexpr int kBlock = 8;
inline constexpr int kBlockPixels = kBlock * kBlock;
inline constexpr int kLowRes = 4;
inline constexpr int kLowResPixels = kLowRes * kLowRes;
inline constexpr int kTemplateCount = 4;
inline constexpr double kCutWeight = 0.01;

enum class TransformKind : std::uint8_t { kDctFull, kGftLow };

struct TransformChoice {
  TransformKind kind = TransformKind::kDctFull;
  std::uint8_t template_id = 0;  // meaningful for kGftLow only

  static TransformChoice dct() { return {}; }
  static TransformChoice gft(int id) {
    return {TransformKind::kGftLow, static_cast<std::uint8_t>(id)};
  }
  int coefficient_count() const {
    return kind == TransformKind::kDctFull ? kBlockPixels : kLowResPixels;
  }
  // 0 = DCT, 1..4 = template 0..3
  int index() const { return kind == TransformKind::kDctFull ? 0 : 1 + template_id; }
  static TransformChoice from_index(int i) { return i == 0 ? dct() : gft(i - 1); }

  friend bool operator==(const TransformChoice&, const TransformChoice&) = default;
};

inline constexpr int kChoiceCount = 1 + kTemplateCount;

namespace detail {

inline const std::array<double, kBlockPixels>& dct_matrix() {
  static const auto table = [] {
    std::array<double, kBlockPixels> m{};
    for (int u = 0; u < kBlock; ++u) {
      const double a = u == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
      for (int x = 0; x < kBlock; ++x) {
        m[u * kBlock + x] = a * std::cos((2 * x + 1) * u * std::numbers::pi / (2.0 * kBlock));
      }
    }
    return m;
  }();
  return table;
}

// Which 4-connected edges of the 4x4 grid each template weakens.
inline bool template_cuts(int id, int x0, int y0, int x1, int y1) {
  switch (id) {
    case 1: return (y0 < 2) != (y1 < 2);                   // horizontal cut
    case 2: return (x0 < 2) != (x1 < 2);                   // vertical cut
    case 3: return (x0 + y0 <= 3) != (x1 + y1 <= 3);       // anti-diagonal cut
    default: return false;
  }
}

}  // namespace detail

// 4x4 grid graph for template `id`: unit weights, cut edges weighted 0.01.
inline BlockGraph template_graph(int id) {
  if (id < 0 || id >= kTemplateCount) {
    fail(ErrorCode::kBadTemplate, "template id " + std::to_string(id));
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(kLowResPixels, kLowResPixels);
  for (int y = 0; y < kLowRes; ++y) {
    for (int x = 0; x < kLowRes; ++x) {
      const int i = y * kLowRes + x;
      if (x + 1 < kLowRes) {
        const double w = detail::template_cuts(id, x, y, x + 1, y) ? kCutWeight : 1.0;
        a(i, i + 1) = a(i + 1, i) = w;
      }
      if (y + 1 < kLowRes) {
        const double w = detail::template_cuts(id, x, y, x, y + 1) ? kCutWeight : 1.0;
        a(i, i + kLowRes) = a(i + kLowRes, i) = w;
      }
    }
  }
  return graph_from_adjacency(std::move(a));
}

inline const std::array<GftBasis, kTemplateCount>& template_bank() {
  static const auto bank = [] {
    std::array<GftBasis, kTemplateCount> b;
    for (int i = 0; i < kTemplateCount; ++i) b[i] = gft_basis(template_graph(i));
    return b;
  }();
  return bank;
}

inline std::array<double, kBlockPixels> dct_forward(std::span<const double> block) {
  const auto& m = detail::dct_matrix();
  std::array<double, kBlockPixels> tmp{};
  std::array<double, kBlockPixels> out{};
  for (int y = 0; y < kBlock; ++y) {
    for (int u = 0; u < kBlock; ++u) {
      double s = 0.0;
      for (int x = 0; x < kBlock; ++x) s += m[u * kBlock + x] * block[y * kBlock + x];
      tmp[y * kBlock + u] = s;
    }
  }
  for (int v = 0; v < kBlock; ++v) {
    for (int u = 0; u < kBlock; ++u) {
      double s = 0.0;
      for (int y = 0; y < kBlock; ++y) s += m[v * kBlock + y] * tmp[y * kBlock + u];
      out[v * kBlock + u] = s;
    }
  }
  return out;
}

inline std::array<double, kBlockPixels> dct_inverse(std::span<const double> coeffs) {
  const auto& m = detail::dct_matrix();
  std::array<double, kBlockPixels> tmp{};
  std::array<double, kBlockPixels> out{};
  for (int v = 0; v < kBlock; ++v) {
    for (int x = 0; x < kBlock; ++x) {
      double s = 0.0;
      for (int u = 0; u < kBlock; ++u) s += m[u * kBlock + x] * coeffs[v * kBlock + u];
      tmp[v * kBlock + x] = s;
    }
  }
  for (int y = 0; y < kBlock; ++y) {
    for (int x = 0; x < kBlock; ++x) {
      double s = 0.0;
      for (int v = 0; v < kBlock; ++v) s += m[v * kBlock + y] * tmp[v * kBlock + x];
      out[y * kBlock + x] = s;
    }
  }
  return out;
}

// Keeps pixels at even coordinates: 8x8 -> 4x4, raster order.
inline std::array<double, kLowResPixels> decimate(std::span<const double> block) {
  std::array<double, kLowResPixels> low{};
  for (int y = 0; y < kLowRes; ++y) {
    for (int x = 0; x < kLowRes; ++x) low[y * kLowRes + x] = block[(2 * y) * kBlock + 2 * x];
  }
  return low;
}

// Residual block (8x8, raster order) -> coefficients for the chosen transform.
inline std::vector<double> transform_block(std::span<const double> residual,
                                           TransformChoice choice) {
  if (residual.size() != kBlockPixels) {
    fail(ErrorCode::kDimensionMismatch, "residual block must hold 64 samples");
  }
  if (choice.kind == TransformKind::kDctFull) {
    const auto c = dct_forward(residual);
    return {c.begin(), c.end()};
  }
  if (choice.template_id >= kTemplateCount) {
    fail(ErrorCode::kBadTemplate, "template id " + std::to_string(choice.template_id));
  }
  const auto low = decimate(residual);
  return gft_forward(low, template_bank()[choice.template_id]);
}

// QP in 0..51; lambda = 0.85 * 2^((QP - 6) / 3).
inline double lambda_from_qp(int qp) {
  if (qp < 0 || qp > 51) fail(ErrorCode::kQpOutOfRange, "qp " + std::to_string(qp));
  return 0.85 * std::exp2((qp - 6) / 3.0);
}

inline double quant_step(int qp) {
  if (qp < 0 || qp > 51) fail(ErrorCode::kQpOutOfRange, "qp " + std::to_string(qp));
  return std::exp2((qp - 4) / 6.0);
}

inline constexpr std::int32_t kMaxLevel = (1 << 15) - 1;

// Round-half-away uniform quantizer without dead zone.
inline std::vector<std::int32_t> quantize(std::span<const double> coefficients, int qp) {
  const double step = quant_step(qp);
  std::vector<std::int32_t> levels(coefficients.size());
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const double c = coefficients[i];
    const double mag = std::floor(std::abs(c) / step + 0.5);
    if (!(mag <= kMaxLevel)) {
      fail(ErrorCode::kEncodeOverflow, "coefficient level exceeds 2^15 cap");
    }
    levels[i] = static_cast<std::int32_t>(c < 0 ? -mag : mag);
  }
  return levels;
}

inline std::vector<double> dequantize(std::span<const std::int32_t> levels, int qp) {
  const double step = quant_step(qp);
  std::vector<double> out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) out[i] = levels[i] * step;
  return out;
}

}  // namespace rvw
