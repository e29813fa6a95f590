#pragma once

// Deterministic software renderer. Every sample is a ray cast against the
// ground plane, analytic spheres and capsules, and cloth triangles. Objects
// are binned into screen tiles by their projected bounding boxes so each
// sample only tests nearby primitives.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "forceforge/camera.hpp"
#include "forceforge/catalog.hpp"
#include "forceforge/image.hpp"
#include "forceforge/parallel.hpp"
#include "forceforge/physics.hpp"

namespace forceforge {

struct Sphere {
  Vec3 center;
  double radius = 0.1;
  ColorF color;
  bool patches = false;  // soccer panel pattern
};

struct Capsule {
  Vec3 a, b;
  double radius = 0.02;
  ColorF color;
};

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  ColorF color;
};

// Ground disc darkened under an object.
struct BlobShadow {
  double x = 0, y = 0, radius = 0;
};

struct Drawables {
  std::vector<Sphere> spheres;
  std::vector<Capsule> capsules;
  std::vector<Mesh> meshes;
  std::vector<BlobShadow> shadows;
};

// Static appearance of a scene; the moving parts come from the simulator state.
struct SceneGeometry {
  int ground_texture = 0;
  int backdrop = 0;
  std::vector<int> ball_colors;  // one color id per ball
  std::vector<int> flag_colors;  // one color id per flag
  ColorF stem_color{0.22, 0.55, 0.18};
  ColorF flower_color{0.93, 0.32, 0.55};
  ColorF pot_color{0.55, 0.33, 0.2};
  ColorF pole_color{0.62, 0.62, 0.6};
};

using SceneState = std::variant<std::vector<BallState>, std::vector<ClothState>, ChainState>;

struct RenderOptions {
  int supersample = 2;  // samples per pixel along each axis
};

inline constexpr double kPoleRadius = 0.025;
inline constexpr double kStemRadius = 0.012;
inline constexpr double kFlowerRadius = 0.045;
inline constexpr double kPotRadius = 0.06;
inline constexpr double kPotHeight = 0.05;
inline constexpr double kShadowDarkening = 0.55;
inline constexpr double kPatchDarkening = 0.55;

namespace detail {

inline Sphere ball_drawable(const BallState& b, int color_id) {
  return {b.position, b.radius, ball_color(color_id), b.material == BallMaterial::soccer};
}

inline void add_cloth(Drawables& out, const ClothState& cloth, int color_id, const ColorF& pole_color) {
  Mesh m;
  m.color = flag_color(color_id);
  m.vertices.reserve(cloth.vertices.size());
  for (const auto& v : cloth.vertices) m.vertices.push_back(v.position);
  for (int r = 0; r + 1 < cloth.rows; ++r)
    for (int c = 0; c + 1 < cloth.cols; ++c) {
      const int i = r * cloth.cols + c;
      m.triangles.push_back({i, i + 1, i + cloth.cols});
      m.triangles.push_back({i + 1, i + cloth.cols + 1, i + cloth.cols});
    }
  out.meshes.push_back(std::move(m));
  const Vec3 top = cloth.vertex(0, 0).position;
  out.capsules.push_back({{top.x, top.y, 0.0}, top + Vec3{0, 0, 0.04}, kPoleRadius, pole_color});
  out.shadows.push_back({top.x, top.y, 2.0 * kPoleRadius});
}

}  // namespace detail

inline Drawables build_drawables(const SceneGeometry& scene, const SceneState& state) {
  Drawables out;
  if (const auto* balls = std::get_if<std::vector<BallState>>(&state)) {
    if (scene.ball_colors.size() != balls->size()) throw InvalidArgument("ball color count does not match state");
    for (std::size_t i = 0; i < balls->size(); ++i) {
      const auto& b = (*balls)[i];
      out.spheres.push_back(detail::ball_drawable(b, scene.ball_colors[i]));
      out.shadows.push_back({b.position.x, b.position.y, b.radius});
    }
  } else if (const auto* flags = std::get_if<std::vector<ClothState>>(&state)) {
    if (scene.flag_colors.size() != flags->size()) throw InvalidArgument("flag color count does not match state");
    for (std::size_t i = 0; i < flags->size(); ++i) detail::add_cloth(out, (*flags)[i], scene.flag_colors[i], scene.pole_color);
  } else {
    const auto& chain = std::get<ChainState>(state);
    const auto nodes = chain.node_positions();
    const Vec3 base = nodes.front();
    out.capsules.push_back({{base.x, base.y, 0.0}, {base.x, base.y, kPotHeight}, kPotRadius, scene.pot_color});
    out.shadows.push_back({base.x, base.y, 1.3 * kPotRadius});
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
      out.capsules.push_back({nodes[i], nodes[i + 1], kStemRadius, scene.stem_color});
    out.spheres.push_back({nodes.back(), kFlowerRadius, scene.flower_color, false});
  }
  return out;
}

namespace detail {

inline const Vec3 kLightDir = normalized(Vec3{0.35, -0.45, 0.82});

inline double lambert(const Vec3& n) { return 0.7 + 0.3 * std::max(0.0, dot(n, kLightDir)); }

// Nearest positive hit of a ray with a sphere.
inline double hit_sphere(const Ray& r, const Vec3& c, double radius) {
  const Vec3 oc = r.origin - c;
  const double b = dot(oc, r.direction);
  const double h = b * b - (dot(oc, oc) - radius * radius);
  if (h < 0.0) return -1.0;
  const double s = std::sqrt(h);
  const double t = -b - s;
  return t > 1e-9 ? t : (-b + s > 1e-9 ? -b + s : -1.0);
}

inline double hit_capsule(const Ray& r, const Capsule& cap, Vec3& normal) {
  const Vec3 ba = cap.b - cap.a, oa = r.origin - cap.a;
  const double baba = dot(ba, ba), bard = dot(ba, r.direction), baoa = dot(ba, oa);
  const double rdoa = dot(r.direction, oa), oaoa = dot(oa, oa);
  const double a = baba - bard * bard;
  const double b = baba * rdoa - baoa * bard;
  const double c = baba * oaoa - baoa * baoa - cap.radius * cap.radius * baba;
  double h = b * b - a * c;
  if (h >= 0.0 && a > 1e-15) {
    const double t = (-b - std::sqrt(h)) / a;
    const double y = baoa + t * bard;
    if (y > 0.0 && y < baba && t > 1e-9) {
      const Vec3 p = r.at(t);
      const Vec3 axis_point = cap.a + ba * (y / baba);
      normal = normalized(p - axis_point);
      return t;
    }
  }
  // end caps
  double best = -1.0;
  for (const Vec3* end : {&cap.a, &cap.b}) {
    const double t = hit_sphere(r, *end, cap.radius);
    if (t > 0.0 && (best < 0.0 || t < best)) {
      best = t;
      normal = normalized(r.at(t) - *end);
    }
  }
  return best;
}

// Moller-Trumbore, two-sided.
inline double hit_triangle(const Ray& r, const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  const Vec3 e1 = p1 - p0, e2 = p2 - p0;
  const Vec3 pv = cross(r.direction, e2);
  const double det = dot(e1, pv);
  if (std::abs(det) < 1e-14) return -1.0;
  const double inv = 1.0 / det;
  const Vec3 tv = r.origin - p0;
  const double u = dot(tv, pv) * inv;
  if (u < 0.0 || u > 1.0) return -1.0;
  const Vec3 qv = cross(tv, e1);
  const double v = dot(r.direction, qv) * inv;
  if (v < 0.0 || u + v > 1.0) return -1.0;
  const double t = dot(e2, qv) * inv;
  return t > 1e-9 ? t : -1.0;
}

// Faked rolling: the panel pattern turns with ground position.
inline bool on_patch(const Vec3& n, const Vec3& center, double radius) {
  const double ay = center.x / radius, ax = -center.y / radius;
  const double cy = std::cos(ay), sy = std::sin(ay), cx = std::cos(ax), sx = std::sin(ax);
  Vec3 m{cy * n.x + sy * n.z, n.y, -sy * n.x + cy * n.z};
  m = {m.x, cx * m.y - sx * m.z, sx * m.y + cx * m.z};
  static const auto dirs = [] {
    const double g = (1.0 + std::sqrt(5.0)) / 2.0;
    std::array<Vec3, 12> d{Vec3{0, 1, g},  Vec3{0, -1, g},  Vec3{0, 1, -g},  Vec3{0, -1, -g},
                           Vec3{1, g, 0},  Vec3{-1, g, 0},  Vec3{1, -g, 0},  Vec3{-1, -g, 0},
                           Vec3{g, 0, 1},  Vec3{-g, 0, 1},  Vec3{g, 0, -1},  Vec3{-g, 0, -1}};
    for (auto& v : d) v = normalized(v);
    return d;
  }();
  for (const auto& d : dirs)
    if (dot(m, d) > 0.93) return true;
  return false;
}

enum class PrimKind : std::uint8_t { sphere, capsule, triangle };

struct PrimRef {
  PrimKind kind;
  std::uint32_t object;
  std::uint32_t index;  // triangle index within a mesh
};

inline constexpr int kTileSize = 16;

struct TileGrid {
  int tiles_x = 0, tiles_y = 0;
  std::vector<std::vector<PrimRef>> bins;

  void add_box(const CameraModel& cam, const CameraBasis& b, double focal, const Vec3& lo, const Vec3& hi,
               PrimRef ref) {
    double umin = std::numeric_limits<double>::infinity(), vmin = umin, umax = -umin, vmax = -umin;
    bool all_front = true;
    for (int k = 0; k < 8; ++k) {
      const Vec3 p{(k & 1) ? hi.x : lo.x, (k & 2) ? hi.y : lo.y, (k & 4) ? hi.z : lo.z};
      const Vec3 d = p - cam.position;
      const double z = dot(d, b.forward);
      if (z <= 1e-6) {
        all_front = false;
        break;
      }
      const double u = 0.5 * cam.dims.width + focal * dot(d, b.right) / z;
      const double v = 0.5 * cam.dims.height - focal * dot(d, b.up) / z;
      umin = std::min(umin, u), umax = std::max(umax, u), vmin = std::min(vmin, v), vmax = std::max(vmax, v);
    }
    int tx0 = 0, ty0 = 0, tx1 = tiles_x - 1, ty1 = tiles_y - 1;
    if (all_front) {
      if (umax < -1.0 || vmax < -1.0 || umin > cam.dims.width || vmin > cam.dims.height) return;
      tx0 = std::clamp(static_cast<int>(std::floor((umin - 1.0) / kTileSize)), 0, tiles_x - 1);
      tx1 = std::clamp(static_cast<int>(std::floor((umax + 1.0) / kTileSize)), 0, tiles_x - 1);
      ty0 = std::clamp(static_cast<int>(std::floor((vmin - 1.0) / kTileSize)), 0, tiles_y - 1);
      ty1 = std::clamp(static_cast<int>(std::floor((vmax + 1.0) / kTileSize)), 0, tiles_y - 1);
    }
    for (int ty = ty0; ty <= ty1; ++ty)
      for (int tx = tx0; tx <= tx1; ++tx) bins[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(ref);
  }
};

inline Vec3 vmin(const Vec3& a, const Vec3& b) { return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)}; }
inline Vec3 vmax(const Vec3& a, const Vec3& b) { return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}; }

inline TileGrid bin_drawables(const Drawables& d, const CameraModel& cam, const CameraBasis& b, double focal) {
  TileGrid g;
  g.tiles_x = (cam.dims.width + kTileSize - 1) / kTileSize;
  g.tiles_y = (cam.dims.height + kTileSize - 1) / kTileSize;
  g.bins.resize(static_cast<std::size_t>(g.tiles_x) * g.tiles_y);
  for (std::uint32_t i = 0; i < d.spheres.size(); ++i) {
    const Vec3 r{d.spheres[i].radius, d.spheres[i].radius, d.spheres[i].radius};
    g.add_box(cam, b, focal, d.spheres[i].center - r, d.spheres[i].center + r, {PrimKind::sphere, i, 0});
  }
  for (std::uint32_t i = 0; i < d.capsules.size(); ++i) {
    const auto& c = d.capsules[i];
    const Vec3 r{c.radius, c.radius, c.radius};
    g.add_box(cam, b, focal, vmin(c.a, c.b) - r, vmax(c.a, c.b) + r, {PrimKind::capsule, i, 0});
  }
  for (std::uint32_t m = 0; m < d.meshes.size(); ++m) {
    const auto& mesh = d.meshes[m];
    for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      const Vec3 &p0 = mesh.vertices[tri[0]], &p1 = mesh.vertices[tri[1]], &p2 = mesh.vertices[tri[2]];
      g.add_box(cam, b, focal, vmin(vmin(p0, p1), p2), vmax(vmax(p0, p1), p2), {PrimKind::triangle, m, t});
    }
  }
  return g;
}

// Ground and sky seen by one sub-pixel sample. Only blob shadows change
// between frames of a fixed-camera clip, so both shadow states are kept.
struct BackgroundSample {
  float lit[3];
  float shadowed[3];
  float x, y;  // ground hit point
  bool ground;
};

inline ColorF to_color(const float (&c)[3]) { return {c[0], c[1], c[2]}; }

inline BackgroundSample shade_background(const Ray& ray, const GroundTexture& ground, const Backdrop& sky) {
  const Vec3& dir = ray.direction;
  BackgroundSample out{};
  auto store = [](float(&dst)[3], const ColorF& c) {
    dst[0] = static_cast<float>(c.r), dst[1] = static_cast<float>(c.g), dst[2] = static_cast<float>(c.b);
  };
  if (dir.z < 0.0) {
    const ColorF horizon = sky.sample(std::atan2(dir.y, dir.x), 0.0);
    const double t = -ray.origin.z / dir.z;
    const Vec3 p = ray.at(t);
    const double haze = 1.0 - std::exp(-t / 60.0);
    const ColorF base = ground.sample(p.x, p.y) * lambert({0, 0, 1});
    store(out.lit, lerp(base, horizon, haze));
    store(out.shadowed, lerp(base * kShadowDarkening, horizon, haze));
    out.x = static_cast<float>(p.x);
    out.y = static_cast<float>(p.y);
    out.ground = true;
  } else {
    store(out.lit, sky.sample(std::atan2(dir.y, dir.x), std::asin(std::min(1.0, dir.z))));
  }
  return out;
}

}  // namespace detail

// Per-sample background of one camera view, computed once and reused for
// every frame of a clip.
class BackgroundCache {
 public:
  BackgroundCache(const SceneGeometry& scene, const CameraModel& cam, const RenderOptions& opt = {})
      : dims_(cam.dims), ss_(opt.supersample) {
    cam.validate();
    if (ss_ < 1) throw InvalidArgument("supersample must be >= 1");
    const auto basis = cam.basis();
    const double focal = cam.focal_px();
    const auto ground = ground_texture(scene.ground_texture);
    const auto sky = backdrop(scene.backdrop);
    samples_.reserve(static_cast<std::size_t>(dims_.width) * dims_.height * ss_ * ss_);
    for (int r = 0; r < dims_.height; ++r)
      for (int c = 0; c < dims_.width; ++c)
        for (int sy = 0; sy < ss_; ++sy)
          for (int sx = 0; sx < ss_; ++sx) {
            const double u = c + (sx + 0.5) / ss_ - 0.5, v = r + (sy + 0.5) / ss_ - 0.5;
            samples_.push_back(detail::shade_background(pixel_ray(cam, basis, focal, u, v), ground, sky));
          }
  }

  bool matches(const CameraModel& cam, const RenderOptions& opt) const { return cam.dims == dims_ && opt.supersample == ss_; }
  const detail::BackgroundSample& sample(std::size_t i) const { return samples_[i]; }

 private:
  VideoDims dims_;
  int ss_;
  std::vector<detail::BackgroundSample> samples_;
};

namespace detail {

struct Shader {
  const Drawables& d;

  ColorF background(const BackgroundSample& bg) const {
    if (bg.ground)
      for (const auto& s : d.shadows) {
        const double dx = bg.x - s.x, dy = bg.y - s.y;
        if (dx * dx + dy * dy < s.radius * s.radius) return to_color(bg.shadowed);
      }
    return to_color(bg.lit);
  }

  ColorF shade(const Ray& ray, const std::vector<PrimRef>& prims, const BackgroundSample& bg) const {
    double best = std::numeric_limits<double>::infinity();
    ColorF color;
    bool hit = false;
    for (const auto& p : prims) {
      switch (p.kind) {
        case PrimKind::sphere: {
          const auto& s = d.spheres[p.object];
          const double t = hit_sphere(ray, s.center, s.radius);
          if (t > 0.0 && t < best) {
            best = t;
            const Vec3 n = normalized(ray.at(t) - s.center);
            color = s.color * (lambert(n) * (s.patches && on_patch(n, s.center, s.radius) ? kPatchDarkening : 1.0));
            hit = true;
          }
          break;
        }
        case PrimKind::capsule: {
          Vec3 n;
          const double t = hit_capsule(ray, d.capsules[p.object], n);
          if (t > 0.0 && t < best) {
            best = t;
            color = d.capsules[p.object].color * lambert(n);
            hit = true;
          }
          break;
        }
        case PrimKind::triangle: {
          const auto& mesh = d.meshes[p.object];
          const auto& tri = mesh.triangles[p.index];
          const Vec3 &p0 = mesh.vertices[tri[0]], &p1 = mesh.vertices[tri[1]], &p2 = mesh.vertices[tri[2]];
          const double t = hit_triangle(ray, p0, p1, p2);
          if (t > 0.0 && t < best) {
            best = t;
            Vec3 n = normalized(cross(p1 - p0, p2 - p0));
            if (dot(n, ray.direction) > 0.0) n = -n;
            color = mesh.color * lambert(n);
            hit = true;
          }
          break;
        }
      }
    }
    if (hit && ray.direction.z < 0.0 && best > -ray.origin.z / ray.direction.z) hit = false;  // below ground
    return hit ? color : background(bg);
  }
};

}  // namespace detail

inline Image render_drawables(const Drawables& d, const SceneGeometry& scene, const CameraModel& cam,
                              const RenderOptions& opt = {}, const BackgroundCache* cache = nullptr) {
  std::optional<BackgroundCache> own;
  if (!cache) cache = &own.emplace(scene, cam, opt);
  if (!cache->matches(cam, opt)) throw InvalidArgument("background cache was built for another view");
  const auto basis = cam.basis();
  const double focal = cam.focal_px();
  const auto grid = detail::bin_drawables(d, cam, basis, focal);
  const detail::Shader shader{d};
  const int ss = opt.supersample;
  const double inv = 1.0 / (ss * ss);
  Image img(cam.dims.width, cam.dims.height);
  std::size_t k = 0;
  for (int r = 0; r < cam.dims.height; ++r)
    for (int c = 0; c < cam.dims.width; ++c) {
      const auto& prims = grid.bins[static_cast<std::size_t>(r / detail::kTileSize) * grid.tiles_x + c / detail::kTileSize];
      ColorF acc;
      for (int sy = 0; sy < ss; ++sy)
        for (int sx = 0; sx < ss; ++sx, ++k) {
          const auto& bg = cache->sample(k);
          if (prims.empty()) {
            acc = acc + shader.background(bg);
          } else {
            const double u = c + (sx + 0.5) / ss - 0.5, v = r + (sy + 0.5) / ss - 0.5;
            acc = acc + shader.shade(pixel_ray(cam, basis, focal, u, v), prims, bg);
          }
        }
      img.set(c, r, to_rgb(acc * inv));
    }
  return img;
}

// Ground and sky only.
inline Image render_background(const SceneGeometry& scene, const CameraModel& cam, const RenderOptions& opt = {}) {
  return render_drawables(Drawables{}, scene, cam, opt);
}

inline Image render_frame(const SceneGeometry& scene, const SceneState& state, const CameraModel& cam,
                          const RenderOptions& opt = {}, const BackgroundCache* cache = nullptr) {
  return render_drawables(build_drawables(scene, state), scene, cam, opt, cache);
}

// Renders one frame per state; frames are independent and may be rendered
// on several threads without changing any pixel.
inline std::vector<Image> render_clip(const SceneGeometry& scene, const std::vector<SceneState>& states,
                                      const CameraModel& cam, int threads = 1, const RenderOptions& opt = {}) {
  if (static_cast<int>(states.size()) != cam.dims.frames)
    throw InvalidArgument("state series has " + std::to_string(states.size()) + " entries, expected " +
                          std::to_string(cam.dims.frames));
  const BackgroundCache cache(scene, cam, opt);
  std::vector<Image> frames(states.size());
  parallel_for(states.size(), threads, [&](std::size_t i) { frames[i] = render_frame(scene, states[i], cam, opt, &cache); });
  return frames;
}

}  // namespace forceforge
