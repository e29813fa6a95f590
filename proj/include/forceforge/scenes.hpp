#pragma once

// Randomized scenario descriptions, templated text prompts and dataset plans.
// Every field of a record is drawn from an Rng seeded with
// derive_seed(master, index), so record i never depends on record j.

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "forceforge/camera.hpp"
#include "forceforge/catalog.hpp"
#include "forceforge/encoder.hpp"
#include "forceforge/physics.hpp"
#include "forceforge/render.hpp"
#include "json.hpp"

namespace forceforge {

using ojson = nlohmann::ordered_json;

enum class Scenario { flag, ball, plant };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::flag: return "flag";
    case Scenario::ball: return "ball";
    default: return "plant";
  }
}

inline Scenario parse_scenario(const std::string& s) {
  if (s == "flag") return Scenario::flag;
  if (s == "ball") return Scenario::ball;
  if (s == "plant") return Scenario::plant;
  throw InvalidArgument("unknown scenario: " + s);
}

struct AblationConfig {
  bool single_flag = false;
  bool single_background = false;
  bool no_distractors = false;
  bool drop_wind_keywords = false;

  bool operator==(const AblationConfig&) const = default;
};

// Orbit camera parameters; see orbit_camera.
struct CameraDraw {
  Vec3 target;
  double azimuth_deg = 0.0;
  double elevation_deg = 30.0;
  double distance = 6.0;
  double fov_deg = 45.0;

  CameraModel model(const VideoDims& dims) const {
    return orbit_camera(target, azimuth_deg, elevation_deg, distance, fov_deg, dims);
  }
  bool operator==(const CameraDraw&) const = default;
};

// Prompt parameters in pixel space of the plan's dims.
struct ForceParams {
  EncodingKind kind = EncodingKind::global;
  double magnitude = 0.0;
  double angle_deg = 0.0;
  double x = 0.0, y = 0.0;  // local only

  bool operator==(const ForceParams&) const = default;
};

struct TextPrompt {
  std::string text;
  bool contains_keywords = false;

  bool operator==(const TextPrompt&) const = default;
};

inline bool has_wind_keyword(const std::string& text) {
  static const std::regex re("wind|breeze|blow", std::regex::icase);
  return std::regex_search(text, re);
}

inline TextPrompt make_prompt_text(std::string text) { return {text, has_wind_keyword(text)}; }

struct FlagPlacement {
  double x = 0, y = 0;
  double yaw_deg = 0;
  double pole_height = 2.0;
  int color_id = 0;

  bool operator==(const FlagPlacement&) const = default;
};

struct FlagSceneSpec {
  int requested_count = 1;
  std::vector<FlagPlacement> flags;
  int backdrop = 0;
  int ground_texture = 0;
  CameraDraw camera;
  double wind_direction_deg = 0.0;
  double wind_speed = 0.0;
  double gust_amplitude = 0.0;
  std::uint64_t gust_seed = 0;

  bool operator==(const FlagSceneSpec&) const = default;
};

struct BallPlacement {
  double x = 0, y = 0;
  BallMaterial material = BallMaterial::soccer;
  int color_id = 0;

  bool operator==(const BallPlacement&) const = default;
};

struct BallSceneSpec {
  int requested_count = 2;
  std::vector<BallPlacement> balls;
  int ground_texture = 0;
  int backdrop = 0;
  CameraDraw camera;
  std::size_t target = 0;
  double force_angle_deg = 0.0;  // world ground-plane direction
  double force_magnitude = 0.0;

  bool operator==(const BallSceneSpec&) const = default;
};

struct PlantSceneSpec {
  CameraDraw camera;
  int ground_texture = 0;
  int backdrop = 0;
  std::size_t contact_segment = 0;
  double force_angle_deg = 0.0;  // in the stem's x-z plane, 0 = +x, 90 = up
  double force_magnitude = 0.0;

  bool operator==(const PlantSceneSpec&) const = default;
};

using SceneSpec = std::variant<FlagSceneSpec, BallSceneSpec, PlantSceneSpec>;

inline Scenario scenario_of(const SceneSpec& s) { return static_cast<Scenario>(s.index()); }

// ---------------------------------------------------------------------------
// Pinned sampling ranges. Positions are uniform over a ground rectangle
// aligned with the camera's horizontal view direction and centered on the
// look-at point, so placements stay in view.

struct FlagRanges {
  int max_count = 64;
  double region_width = 12.0, region_depth = 8.0;  // m, across and along the view
  double min_separation = 1.0;
  double flag_width = 0.9, flag_height = 0.6, flag_mass = 0.1;
  int grid_rows = 7, grid_cols = 10;
  double pole_min = 1.7, pole_max = 2.3;
  double elevation_min = 8.0, elevation_max = 20.0;
  double distance_min = 15.0, distance_max = 18.0;
  double fov = 50.0;
  double target_height = 1.0;
  double gust_max = 0.3;
  int ground_texture = 1;
};

struct BallRanges {
  int min_count = 2, max_count = 4;
  double soccer_probability = 2.0 / 3.0;
  double region_width = 4.0, region_depth = 3.0;
  double min_gap = 0.05;  // m between ball surfaces
  double min_hue_separation = 60.0;
  double elevation_min = 25.0, elevation_max = 55.0;
  double distance_min = 5.0, distance_max = 7.0;
  double fov = 40.0;
  double frame_margin = 0.04;  // fraction of width/height kept clear around ball centers
  int backdrop = 0;
};

struct PlantRanges {
  int segments = 5;
  double azimuth_center = -90.0, azimuth_spread = 20.0;  // roughly frontal to the x-z sway plane
  double elevation_min = 5.0, elevation_max = 25.0;
  double distance_min = 1.8, distance_max = 2.4;
  double fov = 40.0;
  double target_height = 0.45;
  int ground_texture = 8;
  int backdrop = 10;
};

inline constexpr int kMaxPlacementAttempts = 1000;

namespace detail {

// Ground point at camera-aligned offsets (u across, v along the view).
inline Vec3 view_aligned(const CameraDraw& cam, double u, double v) {
  auto [ca, sa] = cos_sin_deg(cam.azimuth_deg);
  const Vec3 forward{-ca, -sa, 0.0};
  const Vec3 right{forward.y, -forward.x, 0.0};
  return Vec3{cam.target.x, cam.target.y, 0.0} + right * u + forward * v;
}

}  // namespace detail

inline Vec3 plant_base() { return {0.0, 0.0, kPotHeight + kPotRadius}; }

inline ClothState make_flag_cloth(const FlagPlacement& p, const FlagRanges& r = {}) {
  return make_flag({p.x, p.y, 0.0}, p.pole_height, r.flag_width, r.flag_height, r.grid_rows, r.grid_cols, p.yaw_deg,
                   r.flag_mass);
}

inline FlagSceneSpec sample_flag_scene(std::uint64_t seed, const AblationConfig& ab = {}, const FlagRanges& r = {},
                                       std::vector<std::string>* warnings = nullptr) {
  Rng rng(seed);
  FlagSceneSpec s;
  const int drawn = static_cast<int>(rng.uniform_int(1, r.max_count));
  s.requested_count = ab.single_flag ? 1 : drawn;
  const int drawn_backdrop = static_cast<int>(rng.uniform_int(0, kBackdropCount - 1));
  s.backdrop = ab.single_background ? 0 : drawn_backdrop;
  s.ground_texture = r.ground_texture;
  s.wind_direction_deg = rng.uniform(0.0, 360.0);
  s.wind_speed = rng.uniform01();
  s.gust_amplitude = rng.uniform(0.0, r.gust_max);
  s.gust_seed = rng.next();
  s.camera.azimuth_deg = rng.uniform(0.0, 360.0);
  s.camera.elevation_deg = rng.uniform(r.elevation_min, r.elevation_max);
  s.camera.distance = rng.uniform(r.distance_min, r.distance_max);
  s.camera.fov_deg = r.fov;
  s.camera.target = {0.0, 0.0, r.target_height};
  for (int i = 0; i < s.requested_count; ++i) {
    FlagPlacement p;
    p.color_id = static_cast<int>(rng.uniform_int(0, kFlagColorCount - 1));
    p.yaw_deg = rng.uniform(0.0, 360.0);
    p.pole_height = rng.uniform(r.pole_min, r.pole_max);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const Vec3 g = detail::view_aligned(s.camera, rng.uniform(-0.5, 0.5) * r.region_width,
                                          rng.uniform(-0.5, 0.5) * r.region_depth);
      placed = std::all_of(s.flags.begin(), s.flags.end(), [&](const FlagPlacement& q) {
        return std::hypot(q.x - g.x, q.y - g.y) >= r.min_separation;
      });
      if (placed) p.x = g.x, p.y = g.y;
    }
    if (placed) {
      s.flags.push_back(p);
    } else if (warnings) {
      warnings->push_back("flag " + std::to_string(i) + " could not be placed; count reduced by 1");
    }
  }
  return s;
}

inline BallSceneSpec sample_ball_scene(std::uint64_t seed, const AblationConfig& ab = {}, const BallRanges& r = {},
                                       const VideoDims& dims = {}) {
  Rng rng(seed);
  BallSceneSpec s;
  const int drawn = static_cast<int>(rng.uniform_int(r.min_count, r.max_count));
  s.requested_count = ab.no_distractors ? 1 : drawn;
  s.ground_texture = static_cast<int>(rng.uniform_int(0, kGroundTextureCount - 1));
  s.backdrop = r.backdrop;
  for (int i = 0; i < s.requested_count; ++i) {
    BallPlacement b;
    b.material = rng.bernoulli(r.soccer_probability) ? BallMaterial::soccer : BallMaterial::bowling;
    for (;;) {  // hue separation keeps every ball separable by color
      b.color_id = static_cast<int>(rng.uniform_int(0, kBallColorCount - 1));
      const bool ok = std::all_of(s.balls.begin(), s.balls.end(), [&](const BallPlacement& o) {
        return hue_distance(ball_hue(o.color_id), ball_hue(b.color_id)) >= r.min_hue_separation;
      });
      if (ok) break;
    }
    s.balls.push_back(b);
  }
  const auto drawn_target = static_cast<std::size_t>(rng.uniform_int(0, s.requested_count - 1));
  s.target = ab.no_distractors ? 0 : drawn_target;
  s.force_angle_deg = rng.uniform(0.0, 360.0);
  s.force_magnitude = rng.uniform01();

  const double min_dist = 2.0 * kBallRadius + r.min_gap;
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxPlacementAttempts) throw Error("ball scene: no visible placement after 1000 attempts");
    s.camera.azimuth_deg = rng.uniform(0.0, 360.0);
    s.camera.elevation_deg = rng.uniform(r.elevation_min, r.elevation_max);
    s.camera.distance = rng.uniform(r.distance_min, r.distance_max);
    s.camera.fov_deg = r.fov;
    s.camera.target = {0.0, 0.0, kBallRadius};
    bool ok = true;
    for (std::size_t i = 0; i < s.balls.size() && ok; ++i) {
      bool placed = false;
      for (int k = 0; k < kMaxPlacementAttempts && !placed; ++k) {
        const Vec3 g = detail::view_aligned(s.camera, rng.uniform(-0.5, 0.5) * r.region_width,
                                            rng.uniform(-0.5, 0.5) * r.region_depth);
        placed = std::all_of(s.balls.begin(), s.balls.begin() + static_cast<std::ptrdiff_t>(i),
                             [&](const BallPlacement& o) { return std::hypot(o.x - g.x, o.y - g.y) >= min_dist; });
        if (placed) s.balls[i].x = g.x, s.balls[i].y = g.y;
      }
      ok = placed;
    }
    if (!ok) continue;
    const auto cam = s.camera.model(dims);
    const double mu = r.frame_margin * dims.width, mv = r.frame_margin * dims.height;
    for (const auto& b : s.balls) {
      const Vec3 c{b.x, b.y, kBallRadius};
      if (view_depth(cam, c) <= 1e-6) {
        ok = false;
        break;
      }
      auto [u, v] = project_point(cam, c);
      if (u < mu || u > dims.width - 1 - mu || v < mv || v > dims.height - 1 - mv) ok = false;
    }
    if (ok) {
      try {  // force direction must not collapse on screen
        screen_angle(cam, {s.balls[s.target].x, s.balls[s.target].y, kBallRadius}, ground_direction(s.force_angle_deg));
      } catch (const DegenerateProjection&) {
        ok = false;
      }
    }
    if (ok) break;
  }
  return s;
}

inline PlantSceneSpec sample_plant_scene(std::uint64_t seed, const PlantRanges& r = {}) {
  Rng rng(seed);
  PlantSceneSpec s;
  s.camera.azimuth_deg = r.azimuth_center + rng.uniform(-r.azimuth_spread, r.azimuth_spread);
  s.camera.elevation_deg = rng.uniform(r.elevation_min, r.elevation_max);
  s.camera.distance = rng.uniform(r.distance_min, r.distance_max);
  s.camera.fov_deg = r.fov;
  s.camera.target = {0.0, 0.0, r.target_height};
  s.ground_texture = r.ground_texture;
  s.backdrop = r.backdrop;
  s.contact_segment = static_cast<std::size_t>(rng.uniform_int(0, r.segments - 1));
  s.force_angle_deg = rng.uniform(0.0, 360.0);
  s.force_magnitude = rng.uniform01();
  return s;
}

// ---------------------------------------------------------------------------
// Force prompts from scene specs

inline Vec3 plant_force_direction(double angle_deg) {
  auto [c, s] = cos_sin_deg(angle_deg);
  return {c, 0.0, s};
}

inline Vec3 plant_contact_point(std::size_t segment, double segment_length = ChainState{}.segment_length) {
  return plant_base() + Vec3{0.0, 0.0, segment_length * static_cast<double>(segment + 1)};
}

inline ForceParams force_params(const SceneSpec& spec, const VideoDims& dims) {
  ForceParams f;
  if (const auto* fl = std::get_if<FlagSceneSpec>(&spec)) {
    const auto cam = fl->camera.model(dims);
    f.kind = EncodingKind::global;
    f.magnitude = fl->wind_speed;
    f.angle_deg = screen_angle(cam, cam.target, ground_direction(fl->wind_direction_deg));
    return f;
  }
  LocalForcePrompt p = [&] {
    if (const auto* b = std::get_if<BallSceneSpec>(&spec)) {
      const auto& t = b->balls.at(b->target);
      return project_force(b->camera.model(dims), {t.x, t.y, kBallRadius}, ground_direction(b->force_angle_deg),
                           b->force_magnitude);
    }
    const auto& pl = std::get<PlantSceneSpec>(spec);
    return project_force(pl.camera.model(dims), plant_contact_point(pl.contact_segment),
                         plant_force_direction(pl.force_angle_deg), pl.force_magnitude);
  }();
  f.kind = EncodingKind::local;
  f.magnitude = p.magnitude();
  f.angle_deg = p.angle_deg();
  f.x = p.x();
  f.y = p.y();
  return f;
}

// Control tensor for stored prompt params; local points are rescaled from the
// plan's dims when rendering at another resolution.
inline ControlTensor encode_force(const ForceParams& f, const VideoDims& plan_dims, const VideoDims& dims,
                                  const BlobParams& blob = {}) {
  if (f.kind == EncodingKind::global) return encode_global(GlobalForcePrompt::create(f.magnitude, f.angle_deg), dims);
  const auto p = LocalForcePrompt::create(f.x, f.y, f.magnitude, f.angle_deg, plan_dims).rescaled(plan_dims, dims);
  return encode_local(p, dims, blob);
}

// ---------------------------------------------------------------------------
// Text prompts. Templates never mention numbers, directions or strengths.

namespace detail {

inline const char* hue_name(double hue) {
  static constexpr const char* names[] = {"red",   "orange", "amber",  "yellow", "lime",   "green",
                                          "green", "teal",   "cyan",   "azure",  "blue",   "blue",
                                          "indigo", "violet", "purple", "magenta", "pink", "crimson"};
  return names[static_cast<int>(normalize_degrees(hue) / 20.0) % 18];
}

inline const char* count_phrase(std::size_t n) {
  if (n == 1) return "a single";
  if (n <= 3) return "a couple of";
  if (n <= 8) return "a handful of";
  if (n <= 20) return "many";
  return "dozens of";
}

inline const char* sky_phrase(int backdrop_id) {
  static constexpr const char* skies[] = {"a clear", "a hazy", "a pale", "a cloudy", "a dusky"};
  return skies[backdrop_id % 5];
}

inline const char* ground_phrase(int ground_id) {
  switch (ground_id % 3) {
    case 0: return "checkered";
    case 1: return "mottled";
    default: return "striped";
  }
}

}  // namespace detail

inline TextPrompt make_text_prompt(const SceneSpec& spec, const AblationConfig& ab = {}) {
  std::ostringstream os;
  if (const auto* f = std::get_if<FlagSceneSpec>(&spec)) {
    const std::size_t n = f->flags.size();
    os << "A " << detail::ground_phrase(f->ground_texture) << " open field under " << detail::sky_phrase(f->backdrop)
       << " sky with " << detail::count_phrase(n) << (n == 1 ? " flag" : " flags") << " on slender poles";
    if (n > 0) os << ", the nearest one " << detail::hue_name(flag_hue(f->flags[0].color_id));
    os << ".";
    static constexpr const char* wind[] = {" The wind picks up and the fabric ripples.",
                                           " A steady breeze sets the cloth in motion.",
                                           " Gusts blow across the field and the fabric streams."};
    static constexpr const char* calm[] = {" The fabric ripples and streams to one side.",
                                           " The cloth lifts and flutters in waves.",
                                           " The fabric sways and snaps along its edge."};
    const auto k = static_cast<std::size_t>(f->gust_seed % 3);
    os << (ab.drop_wind_keywords ? calm[k] : wind[k]);
  } else if (const auto* b = std::get_if<BallSceneSpec>(&spec)) {
    os << "A top-lit scene on a " << detail::ground_phrase(b->ground_texture) << " floor with ";
    for (std::size_t i = 0; i < b->balls.size(); ++i) {
      if (i > 0) os << (i + 1 == b->balls.size() ? " and " : ", ");
      os << "a " << detail::hue_name(ball_hue(b->balls[i].color_id)) << " " << to_string(b->balls[i].material) << " ball";
    }
    os << ". One ball is struck and rolls across the floor.";
  } else {
    os << "A pink carnation on a slender stem in a terracotta pot sways after a light touch.";
  }
  return make_prompt_text(os.str());
}

// ---------------------------------------------------------------------------
// Plans

struct PlanEntry {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  SceneSpec spec;
  ForceParams force;
  TextPrompt prompt;
  std::vector<std::string> warnings;

  Scenario scenario() const { return scenario_of(spec); }
  bool operator==(const PlanEntry&) const = default;
};

struct Plan {
  Scenario scenario = Scenario::ball;
  std::uint64_t master_seed = 0;
  AblationConfig ablation;
  VideoDims dims;
  std::vector<PlanEntry> entries;

  bool operator==(const Plan&) const = default;
};

inline SceneSpec sample_scene(Scenario sc, std::uint64_t seed, const AblationConfig& ab, const VideoDims& dims,
                              std::vector<std::string>* warnings = nullptr) {
  switch (sc) {
    case Scenario::flag: return sample_flag_scene(seed, ab, {}, warnings);
    case Scenario::ball: return sample_ball_scene(seed, ab, {}, dims);
    default: return sample_plant_scene(seed);
  }
}

inline PlanEntry plan_entry(Scenario sc, std::uint64_t master_seed, std::uint64_t index, const AblationConfig& ab,
                            const VideoDims& dims) {
  PlanEntry e;
  e.index = index;
  e.seed = derive_seed(master_seed, index);
  e.spec = sample_scene(sc, e.seed, ab, dims, &e.warnings);
  e.force = force_params(e.spec, dims);
  e.prompt = make_text_prompt(e.spec, ab);
  return e;
}

inline Plan dataset_plan(Scenario sc, std::size_t count, std::uint64_t master_seed, const AblationConfig& ab = {},
                         const VideoDims& dims = {}) {
  if (count < 1) throw InvalidArgument("plan count must be >= 1");
  dims.validate();
  Plan p{sc, master_seed, ab, dims, {}};
  p.entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) p.entries.push_back(plan_entry(sc, master_seed, i, ab, dims));
  return p;
}

// ---------------------------------------------------------------------------
// JSON

inline ojson to_json(const Vec3& v) { return ojson::array({v.x, v.y, v.z}); }
inline Vec3 vec3_from_json(const ojson& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

inline ojson to_json(const AblationConfig& a) {
  return {{"single_flag", a.single_flag},
          {"single_background", a.single_background},
          {"no_distractors", a.no_distractors},
          {"drop_wind_keywords", a.drop_wind_keywords}};
}
inline AblationConfig ablation_from_json(const ojson& j) {
  return {j.at("single_flag").get<bool>(), j.at("single_background").get<bool>(), j.at("no_distractors").get<bool>(),
          j.at("drop_wind_keywords").get<bool>()};
}

inline ojson to_json(const VideoDims& d) {
  return {{"frames", d.frames}, {"channels", d.channels}, {"height", d.height}, {"width", d.width}, {"fps", d.fps}};
}
inline VideoDims dims_from_json(const ojson& j) {
  VideoDims d;
  d.frames = j.at("frames").get<int>();
  d.channels = j.at("channels").get<int>();
  d.height = j.at("height").get<int>();
  d.width = j.at("width").get<int>();
  d.fps = j.at("fps").get<double>();
  d.validate();
  return d;
}

inline ojson to_json(const CameraDraw& c) {
  return {{"target", to_json(c.target)},
          {"azimuth_deg", c.azimuth_deg},
          {"elevation_deg", c.elevation_deg},
          {"distance", c.distance},
          {"fov_deg", c.fov_deg}};
}
inline CameraDraw camera_from_json(const ojson& j) {
  return {vec3_from_json(j.at("target")), j.at("azimuth_deg").get<double>(), j.at("elevation_deg").get<double>(),
          j.at("distance").get<double>(), j.at("fov_deg").get<double>()};
}

inline const char* to_string(EncodingKind k) { return k == EncodingKind::global ? "global" : "local"; }

inline ojson to_json(const ForceParams& f) {
  ojson j{{"type", to_string(f.kind)}};
  if (f.kind == EncodingKind::local) {
    j["x"] = f.x;
    j["y"] = f.y;
  }
  j["force"] = f.magnitude;
  j["angle"] = f.angle_deg;
  return j;
}
inline ForceParams force_from_json(const ojson& j) {
  ForceParams f;
  const auto type = j.at("type").get<std::string>();
  if (type == "global") {
    f.kind = EncodingKind::global;
  } else if (type == "local") {
    f.kind = EncodingKind::local;
    f.x = j.at("x").get<double>();
    f.y = j.at("y").get<double>();
  } else {
    throw InvalidArgument("unknown force type: " + type);
  }
  f.magnitude = j.at("force").get<double>();
  f.angle_deg = j.at("angle").get<double>();
  return f;
}

inline ojson to_json(const SceneSpec& spec) {
  if (const auto* f = std::get_if<FlagSceneSpec>(&spec)) {
    ojson flags = ojson::array();
    for (const auto& p : f->flags)
      flags.push_back({{"x", p.x}, {"y", p.y}, {"yaw_deg", p.yaw_deg}, {"pole_height", p.pole_height}, {"color_id", p.color_id}});
    return {{"requested_count", f->requested_count},
            {"flags", flags},
            {"backdrop", f->backdrop},
            {"ground_texture", f->ground_texture},
            {"camera", to_json(f->camera)},
            {"wind_direction_deg", f->wind_direction_deg},
            {"wind_speed", f->wind_speed},
            {"gust_amplitude", f->gust_amplitude},
            {"gust_seed", f->gust_seed}};
  }
  if (const auto* b = std::get_if<BallSceneSpec>(&spec)) {
    ojson balls = ojson::array();
    for (const auto& p : b->balls)
      balls.push_back({{"x", p.x}, {"y", p.y}, {"material", to_string(p.material)}, {"color_id", p.color_id}});
    return {{"requested_count", b->requested_count},
            {"balls", balls},
            {"ground_texture", b->ground_texture},
            {"backdrop", b->backdrop},
            {"camera", to_json(b->camera)},
            {"target", b->target},
            {"force_angle_deg", b->force_angle_deg},
            {"force_magnitude", b->force_magnitude}};
  }
  const auto& p = std::get<PlantSceneSpec>(spec);
  return {{"camera", to_json(p.camera)},
          {"ground_texture", p.ground_texture},
          {"backdrop", p.backdrop},
          {"contact_segment", p.contact_segment},
          {"force_angle_deg", p.force_angle_deg},
          {"force_magnitude", p.force_magnitude}};
}

inline BallMaterial parse_material(const std::string& s) {
  if (s == "soccer") return BallMaterial::soccer;
  if (s == "bowling") return BallMaterial::bowling;
  throw InvalidArgument("unknown ball material: " + s);
}

inline SceneSpec spec_from_json(Scenario sc, const ojson& j) {
  switch (sc) {
    case Scenario::flag: {
      FlagSceneSpec f;
      f.requested_count = j.at("requested_count").get<int>();
      for (const auto& p : j.at("flags"))
        f.flags.push_back({p.at("x").get<double>(), p.at("y").get<double>(), p.at("yaw_deg").get<double>(),
                           p.at("pole_height").get<double>(), p.at("color_id").get<int>()});
      f.backdrop = j.at("backdrop").get<int>();
      f.ground_texture = j.at("ground_texture").get<int>();
      f.camera = camera_from_json(j.at("camera"));
      f.wind_direction_deg = j.at("wind_direction_deg").get<double>();
      f.wind_speed = j.at("wind_speed").get<double>();
      f.gust_amplitude = j.at("gust_amplitude").get<double>();
      f.gust_seed = j.at("gust_seed").get<std::uint64_t>();
      return f;
    }
    case Scenario::ball: {
      BallSceneSpec b;
      b.requested_count = j.at("requested_count").get<int>();
      for (const auto& p : j.at("balls"))
        b.balls.push_back({p.at("x").get<double>(), p.at("y").get<double>(),
                           parse_material(p.at("material").get<std::string>()), p.at("color_id").get<int>()});
      b.ground_texture = j.at("ground_texture").get<int>();
      b.backdrop = j.at("backdrop").get<int>();
      b.camera = camera_from_json(j.at("camera"));
      b.target = j.at("target").get<std::size_t>();
      b.force_angle_deg = j.at("force_angle_deg").get<double>();
      b.force_magnitude = j.at("force_magnitude").get<double>();
      return b;
    }
    default: {
      PlantSceneSpec p;
      p.camera = camera_from_json(j.at("camera"));
      p.ground_texture = j.at("ground_texture").get<int>();
      p.backdrop = j.at("backdrop").get<int>();
      p.contact_segment = j.at("contact_segment").get<std::size_t>();
      p.force_angle_deg = j.at("force_angle_deg").get<double>();
      p.force_magnitude = j.at("force_magnitude").get<double>();
      return p;
    }
  }
}

inline ojson to_json(const PlanEntry& e) {
  ojson j{{"index", e.index},
          {"seed", e.seed},
          {"scenario", to_string(e.scenario())},
          {"spec", to_json(e.spec)},
          {"force", to_json(e.force)},
          {"prompt", {{"text", e.prompt.text}, {"contains_keywords", e.prompt.contains_keywords}}}};
  if (!e.warnings.empty()) j["warnings"] = e.warnings;
  return j;
}

inline PlanEntry plan_entry_from_json(const ojson& j) {
  PlanEntry e;
  e.index = j.at("index").get<std::uint64_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.spec = spec_from_json(parse_scenario(j.at("scenario").get<std::string>()), j.at("spec"));
  e.force = force_from_json(j.at("force"));
  e.prompt = {j.at("prompt").at("text").get<std::string>(), j.at("prompt").at("contains_keywords").get<bool>()};
  if (j.contains("warnings")) e.warnings = j.at("warnings").get<std::vector<std::string>>();
  return e;
}

// Line 1 is a header object; each following line is one entry.
inline std::string serialize_plan(const Plan& p) {
  std::string out = ojson{{"plan_version", 1},
                          {"scenario", to_string(p.scenario)},
                          {"master_seed", p.master_seed},
                          {"count", p.entries.size()},
                          {"ablation", to_json(p.ablation)},
                          {"dims", to_json(p.dims)}}
                        .dump();
  out += '\n';
  for (const auto& e : p.entries) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

inline Plan parse_plan(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("plan is empty");
  Plan p;
  try {
    const auto h = ojson::parse(line);
    p.scenario = parse_scenario(h.at("scenario").get<std::string>());
    p.master_seed = h.at("master_seed").get<std::uint64_t>();
    p.ablation = ablation_from_json(h.at("ablation"));
    p.dims = dims_from_json(h.at("dims"));
    const auto count = h.at("count").get<std::size_t>();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      p.entries.push_back(plan_entry_from_json(ojson::parse(line)));
      if (p.entries.back().index != p.entries.size() - 1)
        throw Error("plan line " + std::to_string(lineno) + ": index out of sequence");
    }
    if (p.entries.size() != count) throw Error("plan header count does not match entries");
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed plan: ") + e.what());
  }
  return p;
}

}  // namespace forceforge
