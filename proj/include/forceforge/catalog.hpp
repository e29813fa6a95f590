#pragma once

// Versioned procedural asset tables: ball and flag colors, ground textures
// and sky backdrops. Every entry is a pure function of its id.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "forceforge/core.hpp"
#include "forceforge/image.hpp"

namespace forceforge {

inline constexpr const char* kCatalogVersion = "catalog-1";
inline constexpr int kBallColorCount = 108;
inline constexpr int kFlagColorCount = 100;
inline constexpr int kGroundTextureCount = 42;
inline constexpr int kBackdropCount = 50;

struct ColorF {
  double r = 0, g = 0, b = 0;  // linear-ish [0,1] display values

  ColorF operator*(double s) const { return {r * s, g * s, b * s}; }
  ColorF operator+(const ColorF& o) const { return {r + o.r, g + o.g, b + o.b}; }
  bool operator==(const ColorF&) const = default;
};

inline ColorF lerp(const ColorF& a, const ColorF& b, double t) { return a * (1.0 - t) + b * t; }

inline Rgb to_rgb(const ColorF& c) {
  auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  return {q(c.r), q(c.g), q(c.b)};
}

// h in degrees, s and v in [0,1].
inline ColorF hsv(double h, double s, double v) {
  h = normalize_degrees(h) / 60.0;
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

namespace detail {
inline void check_id(int id, int count, const char* what) {
  if (id < 0 || id >= count) throw InvalidArgument(std::string(what) + " id out of range: " + std::to_string(id));
}
}  // namespace detail

// 36 hues x 3 saturated (s, v) variants. Every entry has s * v >= 0.9 so balls
// stay far from the desaturated ground textures in chromaticity.
inline double ball_hue(int id) {
  detail::check_id(id, kBallColorCount, "ball color");
  return 10.0 * (id / 3);
}

inline ColorF ball_color(int id) {
  static constexpr std::array<std::array<double, 2>, 3> sv{{{1.0, 1.0}, {0.9, 1.0}, {1.0, 0.9}}};
  const auto& v = sv[static_cast<std::size_t>(id % 3)];
  return hsv(ball_hue(id), v[0], v[1]);
}

// 25 hues x 4 (s, v) variants.
inline double flag_hue(int id) {
  detail::check_id(id, kFlagColorCount, "flag color");
  return 14.4 * (id / 4);
}

inline ColorF flag_color(int id) {
  static constexpr std::array<std::array<double, 2>, 4> sv{{{0.9, 0.95}, {0.6, 0.95}, {0.9, 0.65}, {0.45, 0.85}}};
  const double hue = flag_hue(id);
  const auto& v = sv[static_cast<std::size_t>(id % 4)];
  return hsv(hue, v[0], v[1]);
}

inline double hue_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

// Smooth lattice noise in [0,1], hashed from integer coordinates.
inline double value_noise(double x, double y, std::uint64_t salt) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
  auto corner = [salt](std::int64_t i, std::int64_t j) {
    const std::uint64_t h = mix64(salt ^ mix64(static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ULL ^
                                               static_cast<std::uint64_t>(j)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  };
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  const double tx = smooth(x - fx), ty = smooth(y - fy);
  const double a = corner(ix, iy), b = corner(ix + 1, iy), c = corner(ix, iy + 1), d = corner(ix + 1, iy + 1);
  return (a + (b - a) * tx) + ((c + (d - c) * tx) - (a + (b - a) * tx)) * ty;
}

enum class TextureFamily { checker, noise, stripe };

inline const char* to_string(TextureFamily f) {
  switch (f) {
    case TextureFamily::checker: return "checker";
    case TextureFamily::noise: return "noise";
    default: return "stripe";
  }
}

// Low-saturation ground recipe.
struct GroundTexture {
  int id = 0;
  TextureFamily family = TextureFamily::checker;
  ColorF a, b;
  double scale = 0.5;  // meters per cell, stripe period or noise feature size
  double angle_deg = 0.0;
  std::uint64_t salt = 0;
  std::string name;

  ColorF sample(double x, double y) const {
    switch (family) {
      case TextureFamily::checker: {
        const auto i = static_cast<std::int64_t>(std::floor(x / scale)) + static_cast<std::int64_t>(std::floor(y / scale));
        return (i & 1) ? b : a;
      }
      case TextureFamily::stripe: {
        auto [c, s] = cos_sin_deg(angle_deg);
        const double u = (x * c + y * s) / scale;
        return (u - std::floor(u)) < 0.5 ? a : b;
      }
      default: {
        const double n = 0.65 * value_noise(x / scale, y / scale, salt) +
                         0.35 * value_noise(2.7 * x / scale, 2.7 * y / scale, salt + 1);
        return lerp(a, b, n);
      }
    }
  }
};

inline constexpr std::uint64_t kCatalogSalt = 0x43415441'4C4F4731ULL;

inline GroundTexture ground_texture(int id) {
  detail::check_id(id, kGroundTextureCount, "ground texture");
  Rng rng(derive_seed(kCatalogSalt, static_cast<std::uint64_t>(id)));
  GroundTexture t;
  t.id = id;
  t.family = static_cast<TextureFamily>(id % 3);
  const double hue = rng.uniform(0.0, 360.0);
  const double sat = rng.uniform(0.02, 0.12);
  const double v1 = rng.uniform(0.35, 0.6);
  const double v2 = std::min(0.85, v1 + rng.uniform(0.1, 0.25));
  t.a = hsv(hue, sat, v1);
  t.b = hsv(hue + rng.uniform(-20.0, 20.0), sat, v2);
  t.scale = t.family == TextureFamily::noise ? rng.uniform(0.3, 1.2) : rng.uniform(0.25, 0.8);
  t.angle_deg = rng.uniform(0.0, 180.0);
  t.salt = rng.next();
  t.name = std::string(to_string(t.family)) + "-" + std::to_string(id);
  return t;
}

// Sky gradient from the horizon to the zenith plus soft cloud noise.
struct Backdrop {
  int id = 0;
  ColorF horizon, zenith, cloud;
  double cloudiness = 0.0;
  double cloud_scale = 1.0;
  std::uint64_t salt = 0;

  // elevation in radians above the horizon, azimuth in radians.
  ColorF sample(double azimuth, double elevation) const {
    const double t = std::clamp(elevation / (0.5 * kPi), 0.0, 1.0);
    ColorF c = lerp(horizon, zenith, std::sqrt(t));
    if (cloudiness > 0.0) {
      const double n = value_noise(azimuth * 4.0 / cloud_scale, elevation * 8.0 / cloud_scale, salt);
      c = lerp(c, cloud, cloudiness * std::max(0.0, n - 0.35) / 0.65);
    }
    return c;
  }
};

inline Backdrop backdrop(int id) {
  detail::check_id(id, kBackdropCount, "backdrop");
  Rng rng(derive_seed(kCatalogSalt ^ 0xB4C6D0ULL, static_cast<std::uint64_t>(id)));
  Backdrop b;
  b.id = id;
  const double hue = rng.uniform(180.0, 250.0) + (id % 5 == 4 ? rng.uniform(-170.0, -120.0) : 0.0);  // some dusk skies
  b.zenith = hsv(hue, rng.uniform(0.25, 0.7), rng.uniform(0.55, 0.9));
  b.horizon = hsv(hue + rng.uniform(-25.0, 25.0), rng.uniform(0.05, 0.3), rng.uniform(0.75, 0.97));
  b.cloud = hsv(0.0, 0.0, rng.uniform(0.85, 1.0));
  b.cloudiness = rng.uniform(0.0, 0.8);
  b.cloud_scale = rng.uniform(0.6, 1.6);
  b.salt = rng.next();
  return b;
}

}  // namespace forceforge
