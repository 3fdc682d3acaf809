#pragma once

// Seeded generators for test and benchmark corpora.
//
// Hosts are piecewise smooth scenes (flat regions, a gentle ramp, a few
// shapes) with mild sensor noise. Logos are piecewise constant: bars, discs
// and boxes on a flat field.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rvw/image.hpp"

namespace rvw {

namespace detail {

inline std::uint8_t to_pixel(double v) {
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

struct Shape {
  int kind = 0;  // 0 box, 1 disc
  double cx = 0, cy = 0, rx = 0, ry = 0;
  double value = 0;

  bool covers(double x, double y) const {
    const double dx = (x - cx) / rx;
    const double dy = (y - cy) / ry;
    return kind == 0 ? (std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0) : dx * dx + dy * dy <= 1.0;
  }
};

inline Shape random_shape(std::mt19937_64& rng, int width, int height, double lo, double hi, double rmin,
                          double rmax) {
  std::uniform_real_distribution<double> ux(0.0, width), uy(0.0, height);
  std::uniform_real_distribution<double> ur(rmin, rmax);
  std::uniform_real_distribution<double> uv(lo, hi);
  Shape s;
  s.kind = static_cast<int>(rng() & 1u);
  s.cx = ux(rng);
  s.cy = uy(rng);
  s.rx = ur(rng) * width;
  s.ry = ur(rng) * height;
  s.value = std::round(uv(rng));
  return s;
}

}  // namespace detail

inline GrayPlane synthetic_host(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> level(40.0, 215.0);
  std::uniform_real_distribution<double> noise_sd(0.3, 1.0);
  std::uniform_int_distribution<int> shape_count(2, 5);
  const double background = std::round(level(rng));
  const double ramp = std::uniform_real_distribution<double>(-20.0, 20.0)(rng);
  const double sd = noise_sd(rng);
  std::vector<detail::Shape> shapes;
  for (int i = shape_count(rng); i > 0; --i) shapes.push_back(detail::random_shape(rng, width, height, 30.0, 225.0, 0.04, 0.15));
  std::normal_distribution<double> noise(0.0, sd);

  GrayPlane out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = background;
      // ramp only in the lower third so a large flat area remains
      if (y > 2 * height / 3) v += ramp * (y - 2.0 * height / 3) / height;
      for (const auto& s : shapes) {
        if (s.covers(x, y)) v = s.value;
      }
      out(x, y) = detail::to_pixel(v + noise(rng));
    }
  }
  return out;
}

inline GrayPlane synthetic_logo(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> level(0.0, 255.0);
  std::uniform_int_distribution<int> shape_count(2, 6);
  const double field = std::round(level(rng));
  std::vector<detail::Shape> shapes;
  for (int i = shape_count(rng); i > 0; --i) shapes.push_back(detail::random_shape(rng, width, height, 0.0, 255.0, 0.08, 0.3));
  // one horizontal bar across the logo
  const int bar_y = std::uniform_int_distribution<int>(0, height - 1)(rng);
  const int bar_h = std::max(2, height / 10);
  const double bar = std::round(level(rng));

  GrayPlane out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = field;
      for (const auto& s : shapes) {
        if (s.covers(x, y)) v = s.value;
      }
      if (y >= bar_y && y < bar_y + bar_h) v = bar;
      out(x, y) = detail::to_pixel(v);
    }
  }
  return out;
}

inline ColorImage synthetic_color_host(int width, int height, std::uint64_t seed) {
  return ColorImage({synthetic_host(width, height, seed * 3 + 0), synthetic_host(width, height, seed * 3 + 1),
                     synthetic_host(width, height, seed * 3 + 2)});
}

inline ColorImage synthetic_color_logo(int width, int height, std::uint64_t seed) {
  return ColorImage({synthetic_logo(width, height, seed * 3 + 0), synthetic_logo(width, height, seed * 3 + 1),
                     synthetic_logo(width, height, seed * 3 + 2)});
}

}  // namespace rvw
