#pragma once

// Shared domain types for forceforge: video dimensions, force prompts,
// angle conventions, typed errors and deterministic seeding.
//
// Screen-space angle convention (used by every module):
//   theta = 0   points toward +x (rightward on screen)
//   theta = 90  points screen-up
// Image rows grow downward, so a unit step along theta moves the pixel
// position by (cos theta, -sin theta). Pixel (c, r) has its center at the
// continuous coordinate (c, r).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace forceforge {

inline constexpr const char* kGeneratorVersion = "forceforge-1.0.0";

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidPrompt : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A prompt whose pixel location lies outside the frame.
class OutOfFrame : public InvalidPrompt {
 public:
  using InvalidPrompt::InvalidPrompt;
};

class BehindCamera : public Error {
 public:
  using Error::Error;
};

class DegenerateProjection : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : Error("simulation diverged at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// ---------------------------------------------------------------------------
// Angles

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

// Reduces any finite angle in degrees into [0, 360).
inline double normalize_degrees(double deg) {
  if (!std::isfinite(deg)) throw InvalidPrompt("angle must be finite");
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;  // r + 360 can round up to 360
  return r;
}

// cos/sin of an angle given in degrees. Multiples of 90 are exact, so the
// cardinal directions encode to exact 0/+-1 values.
inline std::pair<double, double> cos_sin_deg(double deg) {
  const double quadrant = std::round(deg / 90.0);
  const double rest = deg_to_rad(deg - 90.0 * quadrant);
  const double c = std::cos(rest);
  const double s = std::sin(rest);
  const long q = static_cast<long>(quadrant) & 3L;  // two's complement mod 4
  switch (q) {
    case 0: return {c, s};
    case 1: return {-s, c};
    case 2: return {-c, -s};
    default: return {s, -c};
  }
}

// Pixel-space unit step for a screen angle: (cos theta, -sin theta).
inline std::pair<double, double> screen_step(double theta_deg) {
  auto [c, s] = cos_sin_deg(theta_deg);
  return {c, -s};
}

// ---------------------------------------------------------------------------
// Video dimensions

struct VideoDims {
  int frames = 49;
  int channels = 3;
  int height = 480;
  int width = 720;
  double fps = 8.0;

  void validate() const {
    if (frames < 2) throw InvalidArgument("VideoDims: frames must be >= 2");
    if (channels != 3) throw InvalidArgument("VideoDims: channels must be 3");
    if (height <= 0 || width <= 0) throw InvalidArgument("VideoDims: height and width must be positive");
    if (!(fps > 0.0)) throw InvalidArgument("VideoDims: fps must be positive");
  }

  // Same clip, spatially rescaled (used for desk-scale renders and previews).
  VideoDims scaled(double factor) const {
    if (!(factor > 0.0)) throw InvalidArgument("scale factor must be positive");
    VideoDims d = *this;
    d.height = std::max(1, static_cast<int>(std::lround(height * factor)));
    d.width = std::max(1, static_cast<int>(std::lround(width * factor)));
    return d;
  }

  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  std::size_t voxels() const { return static_cast<std::size_t>(frames) * channels * pixels(); }

  friend bool operator==(const VideoDims&, const VideoDims&) = default;
};

// ---------------------------------------------------------------------------
// Force prompts

namespace detail {
inline double checked_magnitude(double f) {
  if (!std::isfinite(f) || f < 0.0 || f > 1.0)
    throw InvalidPrompt("force magnitude must lie in [0, 1], got " + std::to_string(f));
  return f;
}
}  // namespace detail

// Wind-style prompt: a scene-wide force with magnitude in [0,1] and a
// screen angle in [0,360).
class GlobalForcePrompt {
 public:
  static GlobalForcePrompt create(double magnitude, double angle_deg) {
    return GlobalForcePrompt(detail::checked_magnitude(magnitude), normalize_degrees(angle_deg));
  }

  double magnitude() const noexcept { return magnitude_; }
  double angle_deg() const noexcept { return angle_deg_; }

  friend bool operator==(const GlobalForcePrompt&, const GlobalForcePrompt&) = default;

 private:
  GlobalForcePrompt(double m, double a) : magnitude_(m), angle_deg_(a) {}
  double magnitude_;
  double angle_deg_;
};

// Point force applied at a pixel location. F = 0 is a gentle (nonzero) poke.
class LocalForcePrompt {
 public:
  static LocalForcePrompt create(double x, double y, double magnitude, double angle_deg,
                                 const VideoDims& dims) {
    if (!std::isfinite(x) || !std::isfinite(y))
      throw InvalidPrompt("force location must be finite");
    if (x < 0.0 || x > dims.width - 1 || y < 0.0 || y > dims.height - 1)
      throw OutOfFrame("force location (" + std::to_string(x) + ", " + std::to_string(y) +
                       ") outside " + std::to_string(dims.width) + "x" +
                       std::to_string(dims.height) + " frame");
    return LocalForcePrompt(x, y, detail::checked_magnitude(magnitude),
                            normalize_degrees(angle_deg));
  }

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  double magnitude() const noexcept { return magnitude_; }
  double angle_deg() const noexcept { return angle_deg_; }

  // Same force expressed in a frame of different resolution.
  LocalForcePrompt rescaled(const VideoDims& from, const VideoDims& to) const {
    const double sx = static_cast<double>(to.width) / from.width;
    const double sy = static_cast<double>(to.height) / from.height;
    return create(std::min(x_ * sx, to.width - 1.0), std::min(y_ * sy, to.height - 1.0),
                  magnitude_, angle_deg_, to);
  }

  friend bool operator==(const LocalForcePrompt&, const LocalForcePrompt&) = default;

 private:
  LocalForcePrompt(double x, double y, double m, double a)
      : x_(x), y_(y), magnitude_(m), angle_deg_(a) {}
  double x_, y_, magnitude_, angle_deg_;
};

class MultiForcePrompt {
 public:
  static MultiForcePrompt create(std::vector<LocalForcePrompt> forces) {
    if (forces.empty()) throw InvalidPrompt("multi-force prompt needs at least one force");
    return MultiForcePrompt(std::move(forces));
  }

  const std::vector<LocalForcePrompt>& forces() const noexcept { return forces_; }

  friend bool operator==(const MultiForcePrompt&, const MultiForcePrompt&) = default;

 private:
  explicit MultiForcePrompt(std::vector<LocalForcePrompt> f) : forces_(std::move(f)) {}
  std::vector<LocalForcePrompt> forces_;
};

// ---------------------------------------------------------------------------
// Seeding

// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Per-record seed: mix64(mix64(master) ^ index). Stable across versions.
// For a fixed master seed the map index -> seed is injective, since both the
// xor and mix64 are bijections.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t record_index) noexcept {
  return mix64(mix64(master_seed) ^ record_index);
}

struct SeedPath {
  std::uint64_t master_seed = 0;
  std::uint64_t record_index = 0;
  std::uint64_t seed() const noexcept { return derive_seed(master_seed, record_index); }
};

// Portable random source. The engine is std::mt19937_64 (bit-exact across
// standard libraries); the distributions below are written out so draws do
// not depend on the library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [lo, hi], rejection-sampled (no modulo bias).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw InvalidArgument("uniform_int: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1ULL;
    if (range == 0) return static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return lo + static_cast<std::int64_t>(v % range);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller (one value per call).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace forceforge
