#pragma once

// Regularized GFT coding of a difference plane.
//
// Per block, in raster order over the plane padded to a multiple of 8:
// contour-aware intra prediction from reconstructed neighbours, then either a
// full-resolution DCT or a low-resolution template GFT of the residual,
// quantization, and context-adaptive entropy coding. The encoder searches the
// smoothing weight mu over a discrete grid and alternates it with greedy
// per-block transform selection, scoring every candidate against the
// ORIGINAL difference plane.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rvw/contour.hpp"
#include "rvw/entropy.hpp"
#include "rvw/error.hpp"
#include "rvw/image.hpp"
#include "rvw/intra.hpp"
#include "rvw/range_coder.hpp"
#include "rvw/spectral_graph.hpp"
#include "rvw/transform.hpp"

namespace rvw {

inline constexpr std::uint8_t kPacketVersion = 1;
inline constexpr std::size_t kMaxPlanePixels = std::size_t{1} << 22;

struct CodecParams {
  int qp = 28;
  std::vector<double> mu_grid = {1.0, 0.1, 0.01, 0.001, 0.0001};
  int block_size = kBlock;
  int max_alternations = 4;
  double convergence_rel = 1e-3;
  double contour_threshold = kDefaultContourThreshold;
  int smoothing_step = 2;
  double sigma_floor = 1.0;

  void validate() const {
    if (qp < 0 || qp > 51) fail(ErrorCode::kQpOutOfRange, "qp " + std::to_string(qp));
    if (mu_grid.empty() || mu_grid.size() > 255) {
      fail(ErrorCode::kInvalidArgument, "mu grid must hold 1..255 values");
    }
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
      if (!(mu_grid[i] >= 0.0) || !std::isfinite(mu_grid[i])) {
        fail(ErrorCode::kInvalidArgument, "mu values must be finite and >= 0");
      }
      if (i > 0 && !(mu_grid[i] < mu_grid[i - 1])) {
        fail(ErrorCode::kInvalidArgument, "mu grid must be strictly decreasing");
      }
    }
    if (block_size != kBlock) fail(ErrorCode::kInvalidArgument, "only 8x8 blocks are supported");
    if (max_alternations < 0) fail(ErrorCode::kInvalidArgument, "max_alternations < 0");
    if (!(convergence_rel >= 0.0)) fail(ErrorCode::kInvalidArgument, "convergence_rel < 0");
    if (!(contour_threshold >= 0.0)) fail(ErrorCode::kInvalidArgument, "contour threshold < 0");
  }

  SmoothingParams smoothing(double mu) const {
    return SmoothingParams{mu, block_size, smoothing_step, sigma_floor};
  }
};

// Serialized reconstruction payload. Layout (little-endian):
//   "RGFT" | version u8 | roi x0,y0,w,h u16 | qp u8 | mu index u8 |
//   block size u8 | plane count u8 | contour len u32 + bytes |
//   per plane: choice len u32 + bytes, coefficient len u32 + bytes |
//   overflow count u32 + (x u16, y u16, residual i16)* | CRC-32 u32
struct CodedPacket {
  std::uint8_t version = kPacketVersion;
  Roi roi;
  std::uint8_t qp = 28;
  std::uint8_t mu_index = 0;
  std::uint8_t block_size = kBlock;
  std::vector<std::uint8_t> contour_stream;
  std::vector<std::uint8_t> choice_stream;
  std::vector<std::uint8_t> coefficient_stream;
  OverflowList overflow;

  std::vector<std::uint8_t> serialize() const {
    ByteWriter w;
    for (char c : {'R', 'G', 'F', 'T'}) w.u8(static_cast<std::uint8_t>(c));
    w.u8(version);
    w.u16(static_cast<std::uint16_t>(roi.x0));
    w.u16(static_cast<std::uint16_t>(roi.y0));
    w.u16(static_cast<std::uint16_t>(roi.width));
    w.u16(static_cast<std::uint16_t>(roi.height));
    w.u8(qp);
    w.u8(mu_index);
    w.u8(block_size);
    w.u8(1);
    w.u32(static_cast<std::uint32_t>(contour_stream.size()));
    w.bytes(contour_stream);
    w.u32(static_cast<std::uint32_t>(choice_stream.size()));
    w.bytes(choice_stream);
    w.u32(static_cast<std::uint32_t>(coefficient_stream.size()));
    w.bytes(coefficient_stream);
    w.u32(static_cast<std::uint32_t>(overflow.size()));
    for (const auto& e : overflow) {
      w.u16(e.x);
      w.u16(e.y);
      w.i16(e.residual);
    }
    w.u32(crc32_of(w.buffer()));
    return w.take();
  }

  std::size_t bit_length() const { return serialize().size() * 8; }

  // Structure is validated before the checksum, so truncation reports
  // CorruptStream and payload damage reports CrcMismatch.
  static CodedPacket parse(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const auto magic = r.bytes(4);
    if (!std::equal(magic.begin(), magic.end(), "RGFT")) {
      fail(ErrorCode::kCorruptStream, "bad packet magic");
    }
    CodedPacket p;
    p.version = r.u8();
    if (p.version != kPacketVersion) {
      fail(ErrorCode::kUnsupportedVersion, "packet version " + std::to_string(p.version));
    }
    p.roi.x0 = r.u16();
    p.roi.y0 = r.u16();
    p.roi.width = r.u16();
    p.roi.height = r.u16();
    p.qp = r.u8();
    p.mu_index = r.u8();
    p.block_size = r.u8();
    const std::uint8_t planes = r.u8();
    auto stream = [&r] {
      const std::uint32_t n = r.u32();
      const auto s = r.bytes(n);
      return std::vector<std::uint8_t>(s.begin(), s.end());
    };
    p.contour_stream = stream();
    p.choice_stream = stream();
    p.coefficient_stream = stream();
    const std::uint32_t overflow_count = r.u32();
    if (overflow_count > r.remaining() / 6) fail(ErrorCode::kCorruptStream, "overflow list truncated");
    p.overflow.resize(overflow_count);
    for (auto& e : p.overflow) {
      e.x = r.u16();
      e.y = r.u16();
      e.residual = r.i16();
    }
    const std::size_t body = r.position();
    const std::uint32_t crc = r.u32();
    if (r.remaining() != 0) fail(ErrorCode::kCorruptStream, "trailing bytes after packet");
    if (crc != crc32_of(bytes.first(body))) fail(ErrorCode::kCrcMismatch, "packet checksum mismatch");
    if (planes != 1) fail(ErrorCode::kCorruptStream, "unsupported plane count");
    if (p.block_size != kBlock) fail(ErrorCode::kCorruptStream, "unsupported block size");
    if (p.qp > 51) fail(ErrorCode::kCorruptStream, "qp out of range");
    if (p.roi.width == 0 || p.roi.height == 0 || p.roi.area() > kMaxPlanePixels) {
      fail(ErrorCode::kCorruptStream, "implausible roi dimensions");
    }
    for (const auto& e : p.overflow) {
      if (!p.roi.contains(e.x, e.y)) fail(ErrorCode::kCorruptStream, "overflow entry outside roi");
    }
    return p;
  }
};

struct RdCost {
  double distortion = 0.0;
  std::uint64_t rate_bits = 0;
  double lambda = 0.0;
  double cost = 0.0;
};

inline double ssd(const Raster<std::int16_t>& a, const Raster<std::int16_t>& b) {
  if (!a.same_shape(b)) fail(ErrorCode::kDimensionMismatch, "planes differ in size");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.samples()[i] - b.samples()[i];
    sum += d * d;
  }
  return sum;
}

inline RdCost rd_cost(const DifferencePlane& original, const DifferencePlane& reconstructed,
                      std::uint64_t rate_bits, double lambda) {
  RdCost c;
  c.distortion = ssd(original, reconstructed);
  c.rate_bits = rate_bits;
  c.lambda = lambda;
  c.cost = c.distortion + lambda * static_cast<double>(rate_bits);
  return c;
}

struct RoundTrace {
  std::vector<double> sweep_costs;  // one per mu grid entry
  int chosen_mu_index = 0;
  double cost = 0.0;
};

struct EncodeResult {
  CodedPacket packet;
  DifferencePlane reconstructed;
  RdCost cost;
  int mu_index = 0;
  double mu = 0.0;
  int alternation_rounds = 0;
  std::vector<RoundTrace> trace;
  std::vector<TransformChoice> choices;
};

namespace detail {

inline int padded(int extent) { return (extent + kBlock - 1) / kBlock * kBlock; }

struct PlaneCoding {
  std::vector<TransformChoice> choices;
  EntropyStreams streams;
  DifferencePlane reconstructed;
};

// Codes one smoothed plane. With `fixed` empty every block picks the choice
// minimizing SSD(original) + lambda * estimated bits; otherwise the given
// choices are used verbatim.
inline PlaneCoding code_plane(const RealPlane& smoothed, const DifferencePlane& original,
                              const ContourMap& contours, int qp, double lambda,
                              std::span<const TransformChoice> fixed) {
  const int w = original.width();
  const int h = original.height();
  const int pw = padded(w);
  const int ph = padded(h);
  const int bw = pw / kBlock;
  const std::size_t block_count = static_cast<std::size_t>(bw) * (ph / kBlock);
  if (!fixed.empty() && fixed.size() != block_count) {
    fail(ErrorCode::kDimensionMismatch, "choice count does not match block count");
  }
  Raster<int> recon(pw, ph, 0);
  BlockModels models;
  RangeEncoder choice_enc;
  RangeEncoder coeff_enc;
  PlaneCoding out;
  out.choices.reserve(block_count);
  std::array<double, kBlockPixels> residual{};

  for (std::size_t b = 0; b < block_count; ++b) {
    const int ox = static_cast<int>(b % bw) * kBlock;
    const int oy = static_cast<int>(b / bw) * kBlock;
    const BlockValues pred = intra_predict(ox, oy, recon, contours);
    for (int y = 0; y < kBlock; ++y) {
      for (int x = 0; x < kBlock; ++x) {
        const double s = smoothed(std::min(ox + x, w - 1), std::min(oy + y, h - 1));
        residual[y * kBlock + x] = s - pred[y * kBlock + x];
      }
    }
    CodedBlock best;
    BlockValues best_rec{};
    double best_cost = std::numeric_limits<double>::infinity();
    const int first = fixed.empty() ? 0 : fixed[b].index();
    const int last = fixed.empty() ? kChoiceCount - 1 : first;
    for (int c = first; c <= last; ++c) {
      CodedBlock cand;
      cand.choice = TransformChoice::from_index(c);
      cand.levels = quantize(transform_block(residual, cand.choice), qp);
      const BlockValues rec = reconstruct_block(pred, cand.levels, cand.choice, qp, ox, oy, contours);
      double cost = 0.0;
      if (fixed.empty()) {
        double dist = 0.0;
        for (int y = 0; y < kBlock && oy + y < h; ++y) {
          for (int x = 0; x < kBlock && ox + x < w; ++x) {
            const double d = original(ox + x, oy + y) - rec[y * kBlock + x];
            dist += d * d;
          }
        }
        cost = dist + lambda * models.estimate_bits(cand);
      }
      if (cost < best_cost || c == first) {
        best_cost = cost;
        best = std::move(cand);
        best_rec = rec;
      }
    }
    models.encode(choice_enc, coeff_enc, best);
    out.choices.push_back(best.choice);
    for (int y = 0; y < kBlock; ++y) {
      for (int x = 0; x < kBlock; ++x) recon(ox + x, oy + y) = best_rec[y * kBlock + x];
    }
  }
  out.streams = {choice_enc.finish(), coeff_enc.finish()};
  out.reconstructed = DifferencePlane(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.reconstructed(x, y) = static_cast<std::int16_t>(recon(x, y));
  }
  return out;
}

}  // namespace detail

// Blind decoder: everything it needs travels in the packet.
inline DifferencePlane decode(const CodedPacket& packet) {
  if (packet.version != kPacketVersion) fail(ErrorCode::kUnsupportedVersion, "packet version");
  const int w = packet.roi.width;
  const int h = packet.roi.height;
  if (w <= 0 || h <= 0 || packet.roi.area() > kMaxPlanePixels) {
    fail(ErrorCode::kCorruptStream, "implausible roi dimensions");
  }
  if (packet.qp > 51) fail(ErrorCode::kCorruptStream, "qp out of range");
  const ContourMap contours = decode_contours(packet.contour_stream, w, h);
  const int pw = detail::padded(w);
  const int ph = detail::padded(h);
  const int bw = pw / kBlock;
  const std::size_t block_count = static_cast<std::size_t>(bw) * (ph / kBlock);
  RangeDecoder choice_dec(packet.choice_stream);
  RangeDecoder coeff_dec(packet.coefficient_stream);
  BlockModels models;
  Raster<int> recon(pw, ph, 0);
  for (std::size_t b = 0; b < block_count; ++b) {
    const int ox = static_cast<int>(b % bw) * kBlock;
    const int oy = static_cast<int>(b / bw) * kBlock;
    const CodedBlock block = models.decode(choice_dec, coeff_dec);
    const BlockValues pred = intra_predict(ox, oy, recon, contours);
    const BlockValues rec = reconstruct_block(pred, block.levels, block.choice, packet.qp, ox, oy, contours);
    for (int y = 0; y < kBlock; ++y) {
      for (int x = 0; x < kBlock; ++x) recon(ox + x, oy + y) = rec[y * kBlock + x];
    }
  }
  DifferencePlane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(x, y) = static_cast<std::int16_t>(recon(x, y));
  }
  return out;
}

inline DifferencePlane decode(std::span<const std::uint8_t> bytes) {
  return decode(CodedPacket::parse(bytes));
}

namespace detail {

class Encoder {
 public:
  Encoder(const DifferencePlane& diff, const Roi& roi, const CodecParams& params)
      : diff_(diff), roi_(roi), params_(params), lambda_(lambda_from_qp(params.qp)),
        smoothed_(params.mu_grid.size()), contours_(params.mu_grid.size()) {}

  struct Candidate {
    int mu_index = 0;
    CodedPacket packet;
    DifferencePlane reconstructed;
    std::vector<TransformChoice> choices;
    RdCost cost;
  };

  Candidate evaluate(int mu_index, std::span<const TransformChoice> fixed) {
    prepare(mu_index);
    PlaneCoding coding = code_plane(*smoothed_[mu_index], diff_, *contours_[mu_index], params_.qp,
                                    lambda_, fixed);
    Candidate c;
    c.mu_index = mu_index;
    c.packet.roi = roi_;
    c.packet.qp = static_cast<std::uint8_t>(params_.qp);
    c.packet.mu_index = static_cast<std::uint8_t>(mu_index);
    c.packet.contour_stream = encode_contours(*contours_[mu_index]);
    c.packet.choice_stream = std::move(coding.streams.choices);
    c.packet.coefficient_stream = std::move(coding.streams.coefficients);
    c.reconstructed = std::move(coding.reconstructed);
    c.choices = std::move(coding.choices);
    c.cost = rd_cost(diff_, c.reconstructed, c.packet.bit_length(), lambda_);
    return c;
  }

  // Evaluates every mu with the given choices; `known` (if any) is reused for
  // its own mu index.
  Candidate sweep(std::span<const TransformChoice> fixed, RoundTrace& trace,
                  std::optional<Candidate> known = std::nullopt) {
    std::optional<Candidate> best;
    trace.sweep_costs.clear();
    for (int i = 0; i < static_cast<int>(params_.mu_grid.size()); ++i) {
      Candidate c = (known && known->mu_index == i) ? *known : evaluate(i, fixed);
      trace.sweep_costs.push_back(c.cost.cost);
      if (!best || c.cost.cost < best->cost.cost) best = std::move(c);
    }
    trace.chosen_mu_index = best->mu_index;
    trace.cost = best->cost.cost;
    return std::move(*best);
  }

 private:
  void prepare(int mu_index) {
    if (smoothed_[mu_index]) return;
    smoothed_[mu_index] = glr_smooth(diff_, params_.smoothing(params_.mu_grid[mu_index]));
    contours_[mu_index] = detect_contours(*smoothed_[mu_index], params_.contour_threshold);
  }

  const DifferencePlane& diff_;
  Roi roi_;
  const CodecParams& params_;
  double lambda_;
  std::vector<std::optional<RealPlane>> smoothed_;
  std::vector<std::optional<ContourMap>> contours_;
};

}  // namespace detail

// Rate-distortion optimized encoding. Round 0 sweeps the mu grid with every
// block on the DCT; each later round re-selects transforms greedily at the
// current mu and re-sweeps mu with those choices. A round is kept only if it
// lowers the cost, so the accepted cost never increases.
inline EncodeResult encode(const DifferencePlane& diff, const Roi& roi, const CodecParams& params) {
  params.validate();
  if (diff.width() != roi.width || diff.height() != roi.height) {
    fail(ErrorCode::kDimensionMismatch, "difference plane does not match roi");
  }
  if (roi.x0 < 0 || roi.y0 < 0 || roi.x0 > 0xFFFF || roi.y0 > 0xFFFF || roi.width <= 0 ||
      roi.height <= 0 || roi.width > 0xFFFF || roi.height > 0xFFFF || roi.area() > kMaxPlanePixels) {
    fail(ErrorCode::kInvalidArgument, "roi not representable in a packet");
  }
  for (auto v : diff.samples()) {
    if (v < -kMaxDifference || v > kMaxDifference) {
      fail(ErrorCode::kRangeViolation, "difference sample outside -255..255");
    }
  }
  detail::Encoder encoder(diff, roi, params);
  const std::size_t blocks = static_cast<std::size_t>(detail::padded(roi.width) / kBlock) *
                             (detail::padded(roi.height) / kBlock);
  EncodeResult result;
  std::vector<TransformChoice> all_dct(blocks, TransformChoice::dct());
  RoundTrace first;
  auto best = encoder.sweep(all_dct, first);
  result.trace.push_back(first);

  for (int round = 1; round <= params.max_alternations; ++round) {
    auto greedy = encoder.evaluate(best.mu_index, {});
    if (!(greedy.cost.cost < best.cost.cost)) break;
    RoundTrace trace;
    const std::vector<TransformChoice> choices = greedy.choices;
    auto swept = encoder.sweep(choices, trace, std::move(greedy));
    const double improvement =
        best.cost.cost > 0.0 ? (best.cost.cost - swept.cost.cost) / best.cost.cost : 0.0;
    best = std::move(swept);
    result.trace.push_back(trace);
    result.alternation_rounds = round;
    if (improvement < params.convergence_rel) break;
  }

  result.packet = std::move(best.packet);
  result.reconstructed = std::move(best.reconstructed);
  result.cost = best.cost;
  result.mu_index = best.mu_index;
  result.mu = params.mu_grid[best.mu_index];
  result.choices = std::move(best.choices);
  return result;
}

}  // namespace rvw
