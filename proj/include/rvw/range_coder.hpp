#pragma once

// Adaptive binary range coder (LZMA-style carry-propagating encoder with
// 11-bit probabilities and shift-5 adaptation). All arithmetic is integer,
// so streams are bit-identical across platforms.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rvw/error.hpp"

namespace rvw {

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = ::crc32(crc, bytes.data() + pos, chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

inline constexpr int kProbBits = 11;
inline constexpr std::uint16_t kProbOne = 1u << kProbBits;
inline constexpr int kAdaptShift = 5;
inline constexpr std::uint32_t kTopValue = 1u << 24;

// Probability that the next bit is 0, in units of 1/2048.
struct BitModel {
  std::uint16_t p0 = kProbOne / 2;

  // Estimated cost in bits of coding `bit` with the current state.
  double cost(int bit) const {
    const double p = static_cast<double>(bit ? kProbOne - p0 : p0) / kProbOne;
    return -std::log2(p);
  }
};

class RangeEncoder {
 public:
  void encode(BitModel& model, int bit) {
    const std::uint32_t bound = (range_ >> kProbBits) * model.p0;
    if (bit == 0) {
      range_ = bound;
      model.p0 += (kProbOne - model.p0) >> kAdaptShift;
    } else {
      low_ += bound;
      range_ -= bound;
      model.p0 -= model.p0 >> kAdaptShift;
    }
    normalize();
  }

  void encode_bypass(int bit) {
    range_ >>= 1;
    if (bit) low_ += range_;
    normalize();
  }

  void encode_bypass_bits(std::uint32_t value, int count) {
    for (int i = count - 1; i >= 0; --i) encode_bypass((value >> i) & 1u);
  }

  // Flushes and returns the stream. The encoder must not be reused.
  std::vector<std::uint8_t> finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
  }

 private:
  void normalize() {
    while (range_ < kTopValue) {
      range_ <<= 8;
      shift_low();
    }
  }

  void shift_low() {
    if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
      const auto carry = static_cast<std::uint8_t>(low_ >> 32);
      std::uint8_t temp = cache_;
      do {
        // The very first byte is always zero; it is dropped from the stream.
        if (started_) out_.push_back(static_cast<std::uint8_t>(temp + carry));
        started_ = true;
        temp = 0xFF;
      } while (--cache_size_ != 0);
      cache_ = static_cast<std::uint8_t>(low_ >> 24);
    }
    ++cache_size_;
    low_ = (low_ & 0x00FFFFFFu) << 8;
  }

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  bool started_ = false;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes) : in_(bytes) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
  }

  int decode(BitModel& model) {
    const std::uint32_t bound = (range_ >> kProbBits) * model.p0;
    int bit;
    if (code_ < bound) {
      range_ = bound;
      model.p0 += (kProbOne - model.p0) >> kAdaptShift;
      bit = 0;
    } else {
      code_ -= bound;
      range_ -= bound;
      model.p0 -= model.p0 >> kAdaptShift;
      bit = 1;
    }
    normalize();
    return bit;
  }

  int decode_bypass() {
    range_ >>= 1;
    int bit = 0;
    if (code_ >= range_) {
      code_ -= range_;
      bit = 1;
    }
    normalize();
    return bit;
  }

  std::uint32_t decode_bypass_bits(int count) {
    std::uint32_t v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint32_t>(decode_bypass());
    return v;
  }

 private:
  void normalize() {
    while (range_ < kTopValue) {
      range_ <<= 8;
      code_ = (code_ << 8) | next_byte();
    }
  }

  std::uint8_t next_byte() {
    if (pos_ >= in_.size()) fail(ErrorCode::kCorruptStream, "range coder ran past end of stream");
    return in_[pos_++];
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

// Fixed-depth binary tree of adaptive models for symbols in [0, 2^depth).
template <int Depth>
struct BitTree {
  std::array<BitModel, (1u << Depth)> nodes{};

  void encode(RangeEncoder& enc, std::uint32_t symbol) {
    std::uint32_t m = 1;
    for (int i = Depth - 1; i >= 0; --i) {
      const int bit = (symbol >> i) & 1u;
      enc.encode(nodes[m], bit);
      m = (m << 1) | bit;
    }
  }
  std::uint32_t decode(RangeDecoder& dec) {
    std::uint32_t m = 1;
    for (int i = 0; i < Depth; ++i) m = (m << 1) | static_cast<std::uint32_t>(dec.decode(nodes[m]));
    return m - (1u << Depth);
  }
  double cost(std::uint32_t symbol) const {
    double bits = 0.0;
    std::uint32_t m = 1;
    for (int i = Depth - 1; i >= 0; --i) {
      const int bit = (symbol >> i) & 1u;
      bits += nodes[m].cost(bit);
      m = (m << 1) | bit;
    }
    return bits;
  }
};

// Exp-Golomb (k=0) with adaptive prefix models; suffix bits are bypass coded.
inline void put_exp_golomb(RangeEncoder& enc, std::span<BitModel> prefix, std::uint32_t v) {
  const std::uint32_t value = v + 1;
  const int n = std::bit_width(value) - 1;
  for (int i = 0; i < n; ++i) enc.encode(prefix[std::min<std::size_t>(i, prefix.size() - 1)], 1);
  enc.encode(prefix[std::min<std::size_t>(n, prefix.size() - 1)], 0);
  enc.encode_bypass_bits(value & ((1u << n) - 1), n);
}

inline std::uint32_t get_exp_golomb(RangeDecoder& dec, std::span<BitModel> prefix,
                                    int max_prefix) {
  int n = 0;
  while (dec.decode(prefix[std::min<std::size_t>(n, prefix.size() - 1)])) {
    if (++n > max_prefix) fail(ErrorCode::kCorruptStream, "exp-Golomb prefix too long");
  }
  const std::uint32_t value = (1u << n) | dec.decode_bypass_bits(n);
  return value - 1;
}


// Little-endian byte sink/source for the packet and stream framing.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v));
    u16(static_cast<std::uint16_t>(v >> 16));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      u8(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    u8(static_cast<std::uint8_t>(v));
  }
  std::vector<std::uint8_t>& buffer() { return out_; }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint16_t u16() {
    const std::uint16_t lo = u8();
    return static_cast<std::uint16_t>(lo | (u8() << 8));
  }
  std::int16_t i16() { return static_cast<std::int16_t>(u16()); }
  std::uint32_t u32() {
    const std::uint32_t lo = u16();
    return lo | (static_cast<std::uint32_t>(u16()) << 16);
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = u8();
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if (!(b & 0x80)) return v;
    }
    fail(ErrorCode::kCorruptStream, "varint too long");
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail(ErrorCode::kCorruptStream, "truncated stream");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace rvw
