#pragma once

// Control-signal tensors for force prompts.
//
// Global (wind) prompts encode as three constant channels
//   (-1 + 2F, cos theta, sin theta)
// over every frame and pixel. Local (point) prompts encode as a Gaussian blob
// that starts at (x, y) and travels along theta at constant velocity, covering
// (1/8 + 3/8 F) * width pixels by the last frame.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "forceforge/core.hpp"

namespace forceforge {

enum class EncodingKind { global, local };

// Dense f x c x h x w tensor, stored frame-major then channel, row, column.
class ControlTensor {
 public:
  ControlTensor(VideoDims dims, EncodingKind kind)
      : dims_(dims), kind_(kind), values_((dims.validate(), dims.voxels()), 0.0f) {}

  const VideoDims& dims() const noexcept { return dims_; }
  EncodingKind kind() const noexcept { return kind_; }

  std::size_t index(int frame, int channel, int row, int col) const noexcept {
    return ((static_cast<std::size_t>(frame) * dims_.channels + channel) * dims_.height + row) *
               static_cast<std::size_t>(dims_.width) +
           col;
  }
  float at(int frame, int channel, int row, int col) const noexcept {
    return values_[index(frame, channel, row, col)];
  }
  float& at(int frame, int channel, int row, int col) noexcept { return values_[index(frame, channel, row, col)]; }

  std::span<const float> plane(int frame, int channel) const noexcept {
    return {values_.data() + index(frame, channel, 0, 0), dims_.pixels()};
  }
  std::span<float> plane(int frame, int channel) noexcept {
    return {values_.data() + index(frame, channel, 0, 0), dims_.pixels()};
  }

  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }

  bool operator==(const ControlTensor& o) const {
    return dims_ == o.dims_ && kind_ == o.kind_ && values_ == o.values_;
  }

 private:
  VideoDims dims_;
  EncodingKind kind_;
  std::vector<float> values_;
};

struct BlobParams {
  double radius = 20.0;      // nominal blob radius in pixels
  double sigma = 10.0;       // Gaussian falloff
  double truncation = 30.0;  // intensity is zero beyond this distance

  void validate() const {
    if (!(radius > 0.0)) throw InvalidArgument("BlobParams: radius must be positive");
    if (!(sigma > 0.0)) throw InvalidArgument("BlobParams: sigma must be positive");
    if (!(truncation >= radius)) throw InvalidArgument("BlobParams: truncation must be >= radius");
  }

  // sigma = radius / 2, truncated at 3 sigma.
  static BlobParams from_radius(double radius) { return {radius, radius / 2.0, 1.5 * radius}; }

  double intensity(double dist_sq) const {
    if (dist_sq > truncation * truncation) return 0.0;
    return std::min(1.0, std::exp(-dist_sq / (2.0 * sigma * sigma)));
  }

  friend bool operator==(const BlobParams&, const BlobParams&) = default;
};

// ---------------------------------------------------------------------------

inline ControlTensor encode_global(const GlobalForcePrompt& prompt, const VideoDims& dims) {
  dims.validate();
  ControlTensor t(dims, EncodingKind::global);
  auto [c, s] = cos_sin_deg(prompt.angle_deg());
  const float channel_value[3] = {static_cast<float>(-1.0 + 2.0 * prompt.magnitude()), static_cast<float>(c),
                                  static_cast<float>(s)};
  for (int f = 0; f < dims.frames; ++f)
    for (int ch = 0; ch < 3; ++ch) std::ranges::fill(t.plane(f, ch), channel_value[ch]);
  return t;
}

// Total travel of the local-force blob between the first and last frame.
inline double blob_displacement(double magnitude, const VideoDims& dims) {
  return (0.125 + 0.375 * magnitude) * dims.width;
}

// Blob center at a given frame (0-based), in pixel coordinates.
inline std::pair<double, double> blob_center(const LocalForcePrompt& prompt, const VideoDims& dims, int frame) {
  const double t = static_cast<double>(frame) / (dims.frames - 1);
  const double travel = t * blob_displacement(prompt.magnitude(), dims);
  auto [dx, dy] = screen_step(prompt.angle_deg());
  return {prompt.x() + travel * dx, prompt.y() + travel * dy};
}

namespace detail {

// Max-composites one blob into a single-channel plane. Pixels outside the
// frame are skipped.
inline void stamp_blob(std::span<float> plane, const VideoDims& dims, double cx, double cy, const BlobParams& blob) {
  const double reach = blob.truncation;
  const int c0 = std::max(0, static_cast<int>(std::ceil(cx - reach)));
  const int c1 = std::min(dims.width - 1, static_cast<int>(std::floor(cx + reach)));
  const int r0 = std::max(0, static_cast<int>(std::ceil(cy - reach)));
  const int r1 = std::min(dims.height - 1, static_cast<int>(std::floor(cy + reach)));
  for (int r = r0; r <= r1; ++r) {
    const double dy = r - cy;
    float* row = plane.data() + static_cast<std::size_t>(r) * dims.width;
    for (int c = c0; c <= c1; ++c) {
      const double dx = c - cx;
      const float v = static_cast<float>(blob.intensity(dx * dx + dy * dy));
      if (v > row[c]) row[c] = v;
    }
  }
}

}  // namespace detail

// Blob fields of several point forces, combined by pointwise maximum.
inline ControlTensor encode_multi(const MultiForcePrompt& prompt, const VideoDims& dims,
                                  const BlobParams& blob = {}) {
  dims.validate();
  blob.validate();
  ControlTensor t(dims, EncodingKind::local);
  for (int f = 0; f < dims.frames; ++f) {
    auto base = t.plane(f, 0);
    for (const auto& force : prompt.forces()) {
      auto [cx, cy] = blob_center(force, dims, f);
      detail::stamp_blob(base, dims, cx, cy, blob);
    }
    std::ranges::copy(base, t.plane(f, 1).begin());
    std::ranges::copy(base, t.plane(f, 2).begin());
  }
  return t;
}

inline ControlTensor encode_local(const LocalForcePrompt& prompt, const VideoDims& dims,
                                  const BlobParams& blob = {}) {
  return encode_multi(MultiForcePrompt::create({prompt}), dims, blob);
}

// Column/row of the largest value in one frame's channel (first in raster
// order on ties).
inline std::pair<int, int> frame_argmax(const ControlTensor& t, int frame, int channel = 0) {
  auto plane = t.plane(frame, channel);
  const auto it = std::ranges::max_element(plane);
  const auto idx = static_cast<std::size_t>(it - plane.begin());
  return {static_cast<int>(idx % t.dims().width), static_cast<int>(idx / t.dims().width)};
}

}  // namespace forceforge
