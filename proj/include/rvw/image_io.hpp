#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "rvw/error.hpp"
#include "rvw/image.hpp"

namespace rvw {

using Bytes = std::vector<std::uint8_t>;

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)),
              std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::kIoError, "read failed: " + path.string());
  return bytes;
}

// Writes to a sibling temp file and renames it over the target, so a failed
// write never leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      fail(ErrorCode::kIoError, "write failed: " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::kIoError, "cannot rename into " + path.string());
  }
}

namespace detail {

class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(std::span<const std::uint8_t> bytes)
      : bytes_(bytes) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      fail(ErrorCode::kMalformedHeader, "expected integer in PNM header");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 1'000'000) {
        fail(ErrorCode::kMalformedHeader, "PNM header value too large");
      }
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      fail(ErrorCode::kMalformedHeader, "missing separator after maxval");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

inline Image decode_pnm(std::span<const std::uint8_t> bytes) {
  const bool color = bytes[1] == '6';
  PnmHeaderReader reader(bytes);
  const int width = reader.next_int();
  const int height = reader.next_int();
  const int maxval = reader.next_int();
  if (width <= 0 || height <= 0) {
    fail(ErrorCode::kMalformedHeader, "PNM dimensions must be positive");
  }
  if (maxval != 255) {
    fail(ErrorCode::kUnsupportedFormat,
         "only maxval 255 is supported, got " + std::to_string(maxval));
  }
  const std::size_t offset = reader.raster_offset();
  const std::size_t count =
      static_cast<std::size_t>(width) * height * (color ? 3 : 1);
  if (bytes.size() < offset + count) {
    fail(ErrorCode::kMalformedHeader, "PNM raster truncated");
  }
  const auto* raster = bytes.data() + offset;
  if (!color) {
    return GrayPlane(width, height, std::vector<std::uint8_t>(raster, raster + count));
  }
  ColorImage image(width, height);
  for (std::size_t i = 0; i < count / 3; ++i) {
    for (int c = 0; c < 3; ++c) image.channels[c].samples()[i] = raster[3 * i + c];
  }
  return image;
}

inline Bytes encode_pnm(const Image& image) {
  const bool color = std::holds_alternative<ColorImage>(image);
  const int width = color ? std::get<ColorImage>(image).width()
                          : std::get<GrayPlane>(image).width();
  const int height = color ? std::get<ColorImage>(image).height()
                           : std::get<GrayPlane>(image).height();
  const std::string header = std::string(color ? "P6" : "P5") + "\n" +
                             std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  if (!color) {
    const auto s = std::get<GrayPlane>(image).samples();
    out.insert(out.end(), s.begin(), s.end());
    return out;
  }
  const auto& rgb = std::get<ColorImage>(image);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  out.reserve(out.size() + 3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) out.push_back(rgb.channels[c].samples()[i]);
  }
  return out;
}

struct PngImageGuard {
  png_image image{};
  PngImageGuard() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImageGuard() { png_image_free(&image); }
  PngImageGuard(const PngImageGuard&) = delete;
  PngImageGuard& operator=(const PngImageGuard&) = delete;
};

inline Image decode_png(std::span<const std::uint8_t> bytes) {
  PngImageGuard guard;
  png_image& png = guard.image;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    fail(ErrorCode::kMalformedHeader, std::string("PNG: ") + png.message);
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    fail(ErrorCode::kUnsupportedFormat, "PNG bit depth other than 8");
  }
  if (png.format & PNG_FORMAT_FLAG_ALPHA) {
    fail(ErrorCode::kUnsupportedFormat, "PNG alpha channel");
  }
  if (png.format & PNG_FORMAT_FLAG_COLORMAP) {
    fail(ErrorCode::kUnsupportedFormat, "PNG palette");
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int width = static_cast<int>(png.width);
  const int height = static_cast<int>(png.height);
  Bytes raster(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raster.data(), 0, nullptr)) {
    fail(ErrorCode::kMalformedHeader, std::string("PNG: ") + png.message);
  }
  if (!color) return GrayPlane(width, height, std::move(raster));
  ColorImage image(width, height);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) image.channels[c].samples()[i] = raster[3 * i + c];
  }
  return image;
}

inline Bytes encode_png(const Image& image) {
  PngImageGuard guard;
  png_image& png = guard.image;
  Bytes raster;
  if (const auto* gray = std::get_if<GrayPlane>(&image)) {
    png.width = static_cast<png_uint_32>(gray->width());
    png.height = static_cast<png_uint_32>(gray->height());
    png.format = PNG_FORMAT_GRAY;
    raster.assign(gray->samples().begin(), gray->samples().end());
  } else {
    const auto& rgb = std::get<ColorImage>(image);
    png.width = static_cast<png_uint_32>(rgb.width());
    png.height = static_cast<png_uint_32>(rgb.height());
    png.format = PNG_FORMAT_RGB;
    const std::size_t n = rgb.channels[0].size();
    raster.resize(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) raster[3 * i + c] = rgb.channels[c].samples()[i];
    }
  }
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, raster.data(), 0,
                                 nullptr)) {
    fail(ErrorCode::kIoError, std::string("PNG encode: ") + png.message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, raster.data(), 0,
                                 nullptr)) {
    fail(ErrorCode::kIoError, std::string("PNG encode: ") + png.message);
  }
  out.resize(size);
  return out;
}

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace detail

// Format is sniffed from the leading bytes, not the file name.
inline Image decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G',
                                                '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, bytes.begin())) {
    return detail::decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return detail::decode_pnm(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7') {
    fail(ErrorCode::kUnsupportedFormat, "only binary P5/P6 PNM is supported");
  }
  fail(ErrorCode::kUnsupportedFormat, "unrecognized image format");
}

inline Image load_image(const std::filesystem::path& path) {
  return decode_image(read_file(path));
}

inline void save_image(const Image& image, const std::filesystem::path& path) {
  const std::string ext = detail::lower_extension(path);
  const bool color = std::holds_alternative<ColorImage>(image);
  Bytes bytes;
  if (ext == ".png") {
    bytes = detail::encode_png(image);
  } else if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    if ((ext == ".pgm" && color) || (ext == ".ppm" && !color)) {
      fail(ErrorCode::kUnsupportedFormat,
           "extension " + ext + " does not match channel count");
    }
    bytes = detail::encode_pnm(image);
  } else {
    fail(ErrorCode::kUnsupportedFormat, "unsupported output extension '" + ext + "'");
  }
  write_file_atomic(path, bytes);
}

// Difference-plane file: "DIFF", width u16, height u16, samples i16, all LE.
inline Bytes encode_diff(const DifferencePlane& plane) {
  if (plane.width() > 0xFFFF || plane.height() > 0xFFFF) {
    fail(ErrorCode::kInvalidArgument, "difference plane too large for DIFF");
  }
  Bytes out = {'D', 'I', 'F', 'F'};
  auto put16 = [&out](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  put16(static_cast<std::uint16_t>(plane.width()));
  put16(static_cast<std::uint16_t>(plane.height()));
  for (auto v : plane.samples()) put16(static_cast<std::uint16_t>(v));
  return out;
}

inline DifferencePlane decode_diff(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || !std::equal(bytes.begin(), bytes.begin() + 4, "DIFF")) {
    fail(ErrorCode::kMalformedHeader, "missing DIFF magic");
  }
  auto get16 = [&bytes](std::size_t at) {
    return static_cast<std::uint16_t>(bytes[at] | (bytes[at + 1] << 8));
  };
  const int width = get16(4);
  const int height = get16(6);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() != 8 + 2 * n) {
    fail(ErrorCode::kMalformedHeader, "DIFF sample count mismatch");
  }
  std::vector<std::int16_t> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = static_cast<std::int16_t>(get16(8 + 2 * i));
  }
  return DifferencePlane(width, height, std::move(samples));
}

inline DifferencePlane load_diff(const std::filesystem::path& path) {
  return decode_diff(read_file(path));
}

inline void save_diff(const DifferencePlane& plane,
                      const std::filesystem::path& path) {
  write_file_atomic(path, encode_diff(plane));
}

}  // namespace rvw
