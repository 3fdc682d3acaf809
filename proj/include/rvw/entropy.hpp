#pragma once

// Context-adaptive coding of per-block transform choices and quantized
// levels. Two range-coded streams: one for choices, one for coefficients.
//
// Coefficient binarization per block (contexts split by transform class):
//   coded-block flag (context: previous block's flag)
//   last significant scan position (bit tree)
//   per scan position before last: significance flag (per position)
//   per nonzero level: greater-than-one flag (per position), exp-Golomb of
//   |level| - 2 with adaptive prefix, sign as a bypass bit.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <vector>

#include "rvw/range_coder.hpp"
#include "rvw/transform.hpp"

namespace rvw {

struct CodedBlock {
  TransformChoice choice;
  std::vector<std::int32_t> levels;  // natural (not scan) order

  friend bool operator==(const CodedBlock&, const CodedBlock&) = default;
};

struct EntropyStreams {
  std::vector<std::uint8_t> choices;
  std::vector<std::uint8_t> coefficients;
};

namespace detail {

inline const std::array<int, kBlockPixels>& zigzag_scan() {
  static const auto scan = [] {
    std::array<int, kBlockPixels> order{};
    int i = 0;
    for (int s = 0; s < 2 * kBlock - 1; ++s) {
      if (s % 2 == 0) {
        for (int y = std::min(s, kBlock - 1); y >= 0 && s - y < kBlock; --y) {
          order[i++] = y * kBlock + (s - y);
        }
      } else {
        for (int x = std::min(s, kBlock - 1); x >= 0 && s - x < kBlock; --x) {
          order[i++] = (s - x) * kBlock + x;
        }
      }
    }
    return order;
  }();
  return scan;
}

inline int scan_index(TransformKind kind, int pos) {
  return kind == TransformKind::kDctFull ? zigzag_scan()[pos] : pos;
}

template <int LastDepth>
struct ClassModels {
  static constexpr int kCount = 1 << LastDepth;
  std::array<BitModel, 2> cbf{};
  BitTree<LastDepth> last{};
  std::array<BitModel, kCount> sig{};
  std::array<BitModel, kCount> gt1{};
  std::array<BitModel, 16> prefix{};
};

inline double exp_golomb_cost(std::span<const BitModel> prefix, std::uint32_t v) {
  const std::uint32_t value = v + 1;
  const int n = std::bit_width(value) - 1;
  double bits = n;
  for (int i = 0; i < n; ++i) bits += prefix[std::min<std::size_t>(i, prefix.size() - 1)].cost(1);
  bits += prefix[std::min<std::size_t>(n, prefix.size() - 1)].cost(0);
  return bits;
}

inline int last_significant(const CodedBlock& block) {
  const int n = block.choice.coefficient_count();
  for (int pos = n - 1; pos >= 0; --pos) {
    if (block.levels[scan_index(block.choice.kind, pos)] != 0) return pos;
  }
  return -1;
}

}  // namespace detail

// Adaptive state shared by the encoder, the rate estimator and the decoder.
class BlockModels {
 public:
  double estimate_bits(const CodedBlock& block) const {
    double bits = choice_bits(block.choice);
    if (block.choice.kind == TransformKind::kDctFull) {
      bits += coefficient_bits(dct_, block, prev_cbf_[0]);
    } else {
      bits += coefficient_bits(gft_, block, prev_cbf_[1]);
    }
    return bits;
  }

  void encode(RangeEncoder& choice_enc, RangeEncoder& coeff_enc, const CodedBlock& block) {
    check(block);
    const int kind = block.choice.kind == TransformKind::kDctFull ? 0 : 1;
    choice_enc.encode(is_gft_[prev_kind_], kind);
    if (kind == 1) templates_.encode(choice_enc, block.choice.template_id);
    prev_kind_ = kind;
    const int last = detail::last_significant(block);
    if (kind == 0) {
      encode_levels(coeff_enc, dct_, block, last, prev_cbf_[0]);
    } else {
      encode_levels(coeff_enc, gft_, block, last, prev_cbf_[1]);
    }
    prev_cbf_[kind] = last >= 0 ? 1 : 0;
  }

  CodedBlock decode(RangeDecoder& choice_dec, RangeDecoder& coeff_dec) {
    CodedBlock block;
    const int kind = choice_dec.decode(is_gft_[prev_kind_]);
    block.choice = kind == 0 ? TransformChoice::dct()
                             : TransformChoice::gft(static_cast<int>(templates_.decode(choice_dec)));
    prev_kind_ = kind;
    block.levels.assign(block.choice.coefficient_count(), 0);
    int coded;
    if (kind == 0) {
      coded = decode_levels(coeff_dec, dct_, block, prev_cbf_[0]);
    } else {
      coded = decode_levels(coeff_dec, gft_, block, prev_cbf_[1]);
    }
    prev_cbf_[kind] = coded;
    return block;
  }

 private:
  static void check(const CodedBlock& block) {
    if (block.choice.kind == TransformKind::kGftLow && block.choice.template_id >= kTemplateCount) {
      fail(ErrorCode::kBadTemplate, "template id out of range");
    }
    if (static_cast<int>(block.levels.size()) != block.choice.coefficient_count()) {
      fail(ErrorCode::kDimensionMismatch, "level count does not match transform");
    }
    for (auto l : block.levels) {
      if (std::abs(l) > kMaxLevel) fail(ErrorCode::kEncodeOverflow, "level exceeds 2^15 cap");
    }
  }

  double choice_bits(TransformChoice choice) const {
    const int kind = choice.kind == TransformKind::kDctFull ? 0 : 1;
    double bits = is_gft_[prev_kind_].cost(kind);
    if (kind == 1) bits += templates_.cost(choice.template_id);
    return bits;
  }

  template <class Models>
  static double coefficient_bits(const Models& m, const CodedBlock& block, int prev_cbf) {
    const int last = detail::last_significant(block);
    double bits = m.cbf[prev_cbf].cost(last >= 0);
    if (last < 0) return bits;
    bits += m.last.cost(static_cast<std::uint32_t>(last));
    for (int pos = 0; pos <= last; ++pos) {
      const int level = block.levels[detail::scan_index(block.choice.kind, pos)];
      if (pos < last) bits += m.sig[pos].cost(level != 0);
      if (level == 0) continue;
      const auto a = static_cast<std::uint32_t>(std::abs(level));
      bits += m.gt1[pos].cost(a > 1) + 1.0;
      if (a > 1) bits += detail::exp_golomb_cost(m.prefix, a - 2);
    }
    return bits;
  }

  template <class Models>
  static void encode_levels(RangeEncoder& enc, Models& m, const CodedBlock& block, int last,
                            int prev_cbf) {
    enc.encode(m.cbf[prev_cbf], last >= 0);
    if (last < 0) return;
    m.last.encode(enc, static_cast<std::uint32_t>(last));
    for (int pos = 0; pos <= last; ++pos) {
      const int level = block.levels[detail::scan_index(block.choice.kind, pos)];
      if (pos < last) enc.encode(m.sig[pos], level != 0);
      if (level == 0) continue;
      const auto a = static_cast<std::uint32_t>(std::abs(level));
      enc.encode(m.gt1[pos], a > 1);
      if (a > 1) put_exp_golomb(enc, m.prefix, a - 2);
      enc.encode_bypass(level < 0);
    }
  }

  template <class Models>
  static int decode_levels(RangeDecoder& dec, Models& m, CodedBlock& block, int prev_cbf) {
    if (!dec.decode(m.cbf[prev_cbf])) return 0;
    const int last = static_cast<int>(m.last.decode(dec));
    if (last >= block.choice.coefficient_count()) {
      fail(ErrorCode::kCorruptStream, "last position beyond block");
    }
    for (int pos = 0; pos <= last; ++pos) {
      const bool nonzero = pos == last ? true : dec.decode(m.sig[pos]) != 0;
      if (!nonzero) continue;
      std::uint32_t a = 1;
      if (dec.decode(m.gt1[pos])) a = 2 + get_exp_golomb(dec, m.prefix, 15);
      if (a > static_cast<std::uint32_t>(kMaxLevel)) {
        fail(ErrorCode::kCorruptStream, "level exceeds 2^15 cap");
      }
      const int sign = dec.decode_bypass();
      block.levels[detail::scan_index(block.choice.kind, pos)] =
          sign ? -static_cast<int>(a) : static_cast<int>(a);
    }
    return 1;
  }

  std::array<BitModel, 2> is_gft_{};
  BitTree<2> templates_{};
  int prev_kind_ = 0;
  std::array<int, 2> prev_cbf_{};
  detail::ClassModels<6> dct_{};
  detail::ClassModels<4> gft_{};
};

inline EntropyStreams entropy_encode(std::span<const CodedBlock> blocks) {
  BlockModels models;
  RangeEncoder choice_enc;
  RangeEncoder coeff_enc;
  for (const auto& b : blocks) models.encode(choice_enc, coeff_enc, b);
  return {choice_enc.finish(), coeff_enc.finish()};
}

inline std::vector<CodedBlock> entropy_decode(std::span<const std::uint8_t> choices,
                                              std::span<const std::uint8_t> coefficients,
                                              std::size_t block_count) {
  RangeDecoder choice_dec(choices);
  RangeDecoder coeff_dec(coefficients);
  BlockModels models;
  std::vector<CodedBlock> blocks;
  blocks.reserve(block_count);
  for (std::size_t i = 0; i < block_count; ++i) blocks.push_back(models.decode(choice_dec, coeff_dec));
  return blocks;
}

}  // namespace rvw
