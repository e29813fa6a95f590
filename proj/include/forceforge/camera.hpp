#pragma once

// Pinhole camera. Pixel (c, r) has its center at (c, r); the principal point
// is (w/2, h/2); rows grow downward.

#include <cmath>
#include <optional>
#include <utility>

#include "forceforge/core.hpp"
#include "forceforge/vec3.hpp"

namespace forceforge {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length

  Vec3 at(double t) const { return origin + direction * t; }
};

struct CameraBasis {
  Vec3 forward, right, up;
};

struct CameraModel {
  Vec3 position{0.0, -6.0, 3.0};
  Vec3 target{0.0, 0.0, 0.0};
  Vec3 up{0.0, 0.0, 1.0};
  double fov_deg = 45.0;  // vertical
  VideoDims dims{};

  void validate() const {
    dims.validate();
    if (!(fov_deg > 10.0 && fov_deg < 120.0)) throw InvalidArgument("camera fov must be in (10, 120) degrees");
    if (!is_finite(position) || !is_finite(target) || !is_finite(up)) throw InvalidArgument("camera vectors must be finite");
    const Vec3 view = target - position;
    if (norm(view) < 1e-9) throw InvalidArgument("camera position coincides with its target");
    if (norm(cross(normalized(view), normalized(up))) < 1e-6)
      throw InvalidArgument("camera view direction is parallel to up");
  }

  CameraBasis basis() const {
    const Vec3 f = normalized(target - position);
    const Vec3 r = normalized(cross(f, up));
    return {f, r, cross(r, f)};
  }

  double focal_px() const { return 0.5 * dims.height / std::tan(0.5 * deg_to_rad(fov_deg)); }

  // Same pose and field of view at another resolution.
  CameraModel with_dims(const VideoDims& d) const {
    CameraModel c = *this;
    c.dims = d;
    return c;
  }
};

// Camera on a sphere around `target`: azimuth measured on the ground from +x
// toward +y (the direction from the target to the camera), elevation above
// the ground plane.
inline CameraModel orbit_camera(const Vec3& target, double azimuth_deg, double elevation_deg, double distance,
                                double fov_deg, const VideoDims& dims) {
  auto [ca, sa] = cos_sin_deg(azimuth_deg);
  auto [ce, se] = cos_sin_deg(elevation_deg);
  CameraModel c;
  c.target = target;
  c.position = target + Vec3{ca * ce, sa * ce, se} * distance;
  c.fov_deg = fov_deg;
  c.dims = dims;
  if (std::abs(se) > 1.0 - 1e-12) c.up = Vec3{-ca, -sa, 0.0};  // straight down: image top faces away
  c.validate();
  return c;
}

// Depth along the viewing axis.
inline double view_depth(const CameraModel& cam, const Vec3& world) {
  return dot(world - cam.position, cam.basis().forward);
}

inline std::pair<double, double> project_point(const CameraModel& cam, const Vec3& world) {
  const auto b = cam.basis();
  const Vec3 d = world - cam.position;
  const double z = dot(d, b.forward);
  if (!(z > 1e-9)) throw BehindCamera("point is not in front of the camera");
  const double f = cam.focal_px();
  return {0.5 * cam.dims.width + f * dot(d, b.right) / z, 0.5 * cam.dims.height - f * dot(d, b.up) / z};
}

inline bool in_frame(const CameraModel& cam, double u, double v) {
  return u >= 0.0 && u <= cam.dims.width - 1 && v >= 0.0 && v <= cam.dims.height - 1;
}

// Ray through a (sub)pixel location.
inline Ray pixel_ray(const CameraModel& cam, const CameraBasis& b, double focal, double u, double v) {
  const double x = (u - 0.5 * cam.dims.width) / focal;
  const double y = (0.5 * cam.dims.height - v) / focal;
  return {cam.position, normalized(b.forward + b.right * x + b.up * y)};
}

inline Ray pixel_ray(const CameraModel& cam, double u, double v) {
  return pixel_ray(cam, cam.basis(), cam.focal_px(), u, v);
}

// Ray parameter where the ray meets the plane z = height, if in front.
inline std::optional<double> intersect_ground(const Ray& ray, double height = 0.0) {
  if (std::abs(ray.direction.z) < 1e-12) return std::nullopt;
  const double t = (height - ray.origin.z) / ray.direction.z;
  if (!(t > 0.0)) return std::nullopt;
  return t;
}

// Inverse of project_point for points on the ground plane.
inline Vec3 unproject_to_ground(const CameraModel& cam, double u, double v, double height = 0.0) {
  const Ray ray = pixel_ray(cam, u, v);
  const auto t = intersect_ground(ray, height);
  if (!t) throw DegenerateProjection("pixel ray does not meet the ground plane");
  return ray.at(*t);
}

// Screen angle (AngleConvention degrees, 90 = up) of a world direction
// applied at `point`. Uses a finite difference scaled to the point's depth.
inline double screen_angle(const CameraModel& cam, const Vec3& point, const Vec3& direction) {
  if (!(norm(direction) > 0.0) || !is_finite(direction)) throw DegenerateProjection("force direction is zero");
  const Vec3 dir = normalized(direction);
  const double z = view_depth(cam, point);
  const double eps = 1e-4 * std::max(z, 1e-3);
  const auto [u0, v0] = project_point(cam, point);
  const auto [u1, v1] = project_point(cam, point + dir * eps);
  const double du = u1 - u0, dv = v1 - v0;
  // A direction perpendicular to the view ray moves about focal*eps/z pixels.
  const double full = cam.focal_px() * eps / z;
  if (std::hypot(du, dv) < 1e-3 * full) throw DegenerateProjection("force direction is parallel to the view ray");
  return normalize_degrees(rad_to_deg(std::atan2(-dv, du)));
}

// Projects a 3D force to a local prompt. The magnitude is a scenario label
// and passes through unchanged.
inline LocalForcePrompt project_force(const CameraModel& cam, const Vec3& point, const Vec3& direction,
                                      double magnitude) {
  const auto [u, v] = project_point(cam, point);
  return LocalForcePrompt::create(u, v, magnitude, screen_angle(cam, point, direction), cam.dims);
}

}  // namespace forceforge
