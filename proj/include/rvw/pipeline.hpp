#pragma once

// End-to-end reversible visible watermarking.
//
// embed:   D = (I - I^w) on the ROI; (packet, D') = encode(D); e = D - D';
//          I^w' = I^w + e (overflow folded into the packet);
//          I^w'' = rdh_embed(I^w', ROI, tag | packet | crc32(I))
// restore: ROI from the RDH reserve; (payload, I^w') = rdh_extract;
//          D' = decode(packet); I = I^w' + D' (+ overflow residuals)
//
// Each channel of a color image runs the same steps independently and
// carries its own payload in its own non-ROI region.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rvw/error.hpp"
#include "rvw/image.hpp"
#include "rvw/metrics.hpp"
#include "rvw/parallel.hpp"
#include "rvw/range_coder.hpp"
#include "rvw/rdh_histogram.hpp"
#include "rvw/rgft_codec.hpp"
#include "rvw/visible_watermark.hpp"

namespace rvw {

struct EmbedConfig {
  CodecParams codec;
  Roi roi;
  std::optional<AlphaParams> visible;  // used by embed_visible only
};

struct ChannelReport {
  std::uint64_t n_c = 0;  // packet bits
  double chosen_mu = 0.0;
  int alternation_rounds = 0;
  std::size_t overflow_count = 0;
  std::size_t payload_bits = 0;  // embedded: tag + packet + digest
  std::size_t capacity_bits = 0;
};

struct EmbedReport {
  std::uint64_t n_d = 0;
  std::uint64_t n_c = 0;
  double ratio = 0.0;
  double psnr_i = kInfinity;
  double psnr_n = kInfinity;
  double psnr_w = kInfinity;
  double chosen_mu = 0.0;  // channel 0
  int alternation_rounds = 0;  // channel 0
  std::vector<ChannelReport> channels;
  std::size_t pixels_changed_outside_roi = 0;  // between I and I^w; nonzero means I is not recoverable there
};

template <class Img>
struct EmbedResult {
  Img final_image;
  EmbedReport report;
};

template <class Img>
struct RestoreResult {
  Img host;
  Img intermediate;  // I^w'
};

namespace detail {

struct ChannelEmbed {
  GrayPlane final_plane;
  ChannelReport report;
};

// Digest of what restore can rebuild: host inside the ROI, I^w elsewhere.
inline std::uint32_t expected_digest(const GrayPlane& host, const GrayPlane& watermarked, const Roi& roi) {
  GrayPlane expected = watermarked;
  for (int y = roi.y0; y < roi.y0 + roi.height; ++y) {
    for (int x = roi.x0; x < roi.x0 + roi.width; ++x) expected(x, y) = host(x, y);
  }
  return crc32_of(expected.samples());
}

inline std::vector<std::uint8_t> channel_payload(std::uint8_t tag, std::span<const std::uint8_t> packet,
                                                 std::uint32_t digest) {
  std::vector<std::uint8_t> payload;
  payload.reserve(packet.size() + 5);
  payload.push_back(tag);
  payload.insert(payload.end(), packet.begin(), packet.end());
  for (int i = 0; i < 4; ++i) payload.push_back(static_cast<std::uint8_t>(digest >> (8 * i)));
  return payload;
}

inline ChannelEmbed embed_channel(const GrayPlane& host, const GrayPlane& watermarked, const EmbedConfig& config,
                                  std::uint8_t tag) {
  const DifferencePlane diff = difference(host, watermarked, config.roi);
  EncodeResult coded = encode(diff, config.roi, config.codec);
  const ErrorPlane e = error_plane(diff, coded.reconstructed);
  Compensated comp = compensate(watermarked, e, config.roi);
  coded.packet.overflow = comp.overflow;
  const auto packet_bytes = coded.packet.serialize();
  const auto payload = channel_payload(tag, packet_bytes, expected_digest(host, watermarked, config.roi));
  const BitString bits = bytes_to_bits(payload);

  ChannelEmbed out;
  out.report.n_c = packet_bytes.size() * 8;
  out.report.chosen_mu = coded.mu;
  out.report.alternation_rounds = coded.alternation_rounds;
  out.report.overflow_count = comp.overflow.size();
  out.report.payload_bits = bits.size();
  out.report.capacity_bits = rdh_capacity(comp.image, config.roi);
  out.final_plane = rdh_embed(comp.image, config.roi, bits);
  return out;
}

inline std::size_t count_changed_outside(const GrayPlane& a, const GrayPlane& b, const Roi& roi) {
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!roi.contains(x, y) && a(x, y) != b(x, y)) ++n;
    }
  }
  return n;
}

inline void check_inputs(int hw, int hh, int ww, int wh, const EmbedConfig& config) {
  if (hw != ww || hh != wh) fail(ErrorCode::kDimensionMismatch, "host and watermarked differ in size");
  if (hw > 0xFFFF || hh > 0xFFFF) fail(ErrorCode::kInvalidArgument, "images wider or taller than 65535");
  require_roi(config.roi, hw, hh);
  config.codec.validate();
}

struct ChannelRestore {
  GrayPlane host;
  GrayPlane intermediate;
};

inline ChannelRestore restore_channel(const GrayPlane& final_plane, std::uint8_t tag, const Roi& roi) {
  RdhExtraction ex = rdh_extract(final_plane, roi);
  const auto payload = bits_to_bytes(ex.payload);
  if (payload.size() < 5) fail(ErrorCode::kMalformedHeader, "payload too short");
  if (payload[0] != tag) fail(ErrorCode::kMalformedHeader, "channel tag mismatch");
  const std::span<const std::uint8_t> packet_bytes(payload.data() + 1, payload.size() - 5);
  std::uint32_t digest = 0;
  for (int i = 0; i < 4; ++i) digest |= static_cast<std::uint32_t>(payload[payload.size() - 4 + i]) << (8 * i);

  const CodedPacket packet = CodedPacket::parse(packet_bytes);
  if (packet.roi != roi) fail(ErrorCode::kMalformedHeader, "packet roi differs from reserve roi");
  const DifferencePlane reconstructed = decode(packet);
  GrayPlane host = apply_difference(ex.restored, reconstructed, roi, packet.overflow);
  if (crc32_of(host.samples()) != digest) {
    fail(ErrorCode::kCrcMismatch, "restored host does not match its embedded digest");
  }
  return {std::move(host), std::move(ex.restored)};
}

inline void finish_report(EmbedReport& r, const Roi& roi, std::size_t channels) {
  r.n_d = raw_bits(roi.width, roi.height) * channels;
  r.n_c = 0;
  for (const auto& c : r.channels) r.n_c += c.n_c;
  r.ratio = compression_ratio(static_cast<double>(r.n_c), static_cast<double>(r.n_d));
  r.chosen_mu = r.channels.front().chosen_mu;
  r.alternation_rounds = r.channels.front().alternation_rounds;
}

}  // namespace detail

inline EmbedResult<GrayPlane> embed(const GrayPlane& host, const GrayPlane& watermarked,
                                    const EmbedConfig& config) {
  detail::check_inputs(host.width(), host.height(), watermarked.width(), watermarked.height(), config);
  auto ch = detail::embed_channel(host, watermarked, config, 0);
  EmbedResult<GrayPlane> out;
  out.report.channels.push_back(ch.report);
  out.report.pixels_changed_outside_roi = detail::count_changed_outside(host, watermarked, config.roi);
  detail::finish_report(out.report, config.roi, 1);
  const auto p = psnr_regions(watermarked, ch.final_plane, config.roi);
  out.report.psnr_i = p.whole;
  out.report.psnr_n = p.non_roi;
  out.report.psnr_w = p.roi;
  out.final_image = std::move(ch.final_plane);
  return out;
}

inline EmbedResult<ColorImage> embed(const ColorImage& host, const ColorImage& watermarked,
                                     const EmbedConfig& config) {
  detail::check_inputs(host.width(), host.height(), watermarked.width(), watermarked.height(), config);
  std::array<detail::ChannelEmbed, 3> channels;
  parallel_for(3, [&](std::size_t c) {
    channels[c] = detail::embed_channel(host.channels[c], watermarked.channels[c], config,
                                        static_cast<std::uint8_t>(c));
  });
  EmbedResult<ColorImage> out;
  out.final_image = ColorImage(host.width(), host.height());
  for (int c = 0; c < 3; ++c) {
    out.report.channels.push_back(channels[c].report);
    out.report.pixels_changed_outside_roi +=
        detail::count_changed_outside(host.channels[c], watermarked.channels[c], config.roi);
    out.final_image.channels[c] = std::move(channels[c].final_plane);
  }
  detail::finish_report(out.report, config.roi, 3);
  const auto p = psnr_regions(watermarked, out.final_image, config.roi);
  out.report.psnr_i = p.whole;
  out.report.psnr_n = p.non_roi;
  out.report.psnr_w = p.roi;
  return out;
}

// Alpha-fuses `logo` into the host over config.visible->roi, then embeds.
inline EmbedResult<GrayPlane> embed_visible(const GrayPlane& host, const GrayPlane& logo, const EmbedConfig& config) {
  if (!config.visible) fail(ErrorCode::kInvalidArgument, "no visible embedding parameters");
  if (config.visible->roi != config.roi) fail(ErrorCode::kInvalidArgument, "visible roi differs from embed roi");
  return embed(host, alpha_embed(host, logo, *config.visible), config);
}

inline EmbedResult<ColorImage> embed_visible(const ColorImage& host, const ColorImage& logo,
                                             const EmbedConfig& config) {
  if (!config.visible) fail(ErrorCode::kInvalidArgument, "no visible embedding parameters");
  if (config.visible->roi != config.roi) fail(ErrorCode::kInvalidArgument, "visible roi differs from embed roi");
  ColorImage fused;
  for (int c = 0; c < 3; ++c) fused.channels[c] = alpha_embed(host.channels[c], logo.channels[c], *config.visible);
  return embed(host, fused, config);
}

// Blind: the final image is the only input.
inline RestoreResult<GrayPlane> restore(const GrayPlane& final_image) {
  const Roi roi = rdh_read_roi(final_image);
  auto ch = detail::restore_channel(final_image, 0, roi);
  return {std::move(ch.host), std::move(ch.intermediate)};
}

inline RestoreResult<ColorImage> restore(const ColorImage& final_image) {
  const Roi roi = rdh_read_roi(final_image.channels[0]);
  std::array<detail::ChannelRestore, 3> channels;
  parallel_for(3, [&](std::size_t c) {
    channels[c] = detail::restore_channel(final_image.channels[c], static_cast<std::uint8_t>(c), roi);
  });
  RestoreResult<ColorImage> out{ColorImage(final_image.width(), final_image.height()),
                                ColorImage(final_image.width(), final_image.height())};
  for (int c = 0; c < 3; ++c) {
    out.host.channels[c] = std::move(channels[c].host);
    out.intermediate.channels[c] = std::move(channels[c].intermediate);
  }
  return out;
}

}  // namespace rvw
