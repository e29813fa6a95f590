#pragma once

// Trajectory extraction from rendered frames, the force-distance mass study
// and the distribution audit.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "forceforge/dataset.hpp"
#include "forceforge/stats.hpp"

namespace forceforge {

// ---------------------------------------------------------------------------
// Tracking

enum class TrackSource { segmentation, ground_truth };

inline const char* to_string(TrackSource s) { return s == TrackSource::segmentation ? "segmentation" : "ground-truth-state"; }

struct TrajectorySample {
  int frame = 0;
  double u = 0.0, v = 0.0;
  TrackSource source = TrackSource::segmentation;
  bool off_screen = false;
};

struct TrackOptions {
  double tolerance = 60.0;  // per channel, 0..255, after brightness fitting
  double min_scale = 0.3;   // darkest accepted shade relative to the base color
  double max_scale = 1.3;
  int min_pixels = 3;
};

struct Component {
  double u = 0, v = 0;
  int pixels = 0;
  bool touches_border = false;
};

// A pixel matches when some brightness scale s brings s*signature within the
// per-channel tolerance. Lighting and panel darkening only scale a color, so
// one signature covers the whole shaded ball.
inline bool matches_signature(const Rgb& p, const ColorF& sig, const TrackOptions& opt) {
  const double c[3] = {sig.r * 255.0, sig.g * 255.0, sig.b * 255.0};
  const double cc = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
  if (cc <= 0.0) return false;
  const double s = (p[0] * c[0] + p[1] * c[1] + p[2] * c[2]) / cc;
  if (s < opt.min_scale || s > opt.max_scale) return false;
  for (int k = 0; k < 3; ++k)
    if (std::abs(p[static_cast<std::size_t>(k)] - s * c[k]) > opt.tolerance) return false;
  return true;
}

// 4-connected components of matching pixels.
inline std::vector<Component> segment(const Image& img, const ColorF& sig, const TrackOptions& opt = {}) {
  const int w = img.width, h = img.height;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) mask[static_cast<std::size_t>(r) * w + c] = matches_signature(img.pixel(c, r), sig, opt);
  std::vector<Component> out;
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (mask[static_cast<std::size_t>(start)] != 1) continue;
    Component comp;
    double su = 0, sv = 0;
    stack.assign(1, start);
    mask[static_cast<std::size_t>(start)] = 2;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      const int r = i / w, c = i % w;
      su += c;
      sv += r;
      ++comp.pixels;
      if (r == 0 || c == 0 || r == h - 1 || c == w - 1) comp.touches_border = true;
      const int nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& n : nb) {
        if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) continue;
        auto& m = mask[static_cast<std::size_t>(n[0]) * w + n[1]];
        if (m == 1) {
          m = 2;
          stack.push_back(n[0] * w + n[1]);
        }
      }
    }
    if (comp.pixels >= opt.min_pixels) {
      comp.u = su / comp.pixels;
      comp.v = sv / comp.pixels;
      out.push_back(comp);
    }
  }
  return out;
}

// Per-frame centroid of the component nearest the previous position (or the
// ground truth, when given). Frames where segmentation finds nothing usable
// (no component, or only one cut by the image border) fall back to the
// ground-truth projection and are labeled as such.
inline std::vector<TrajectorySample> track_centroid(const std::vector<Image>& frames, const ColorF& signature,
                                                    const std::vector<std::optional<std::pair<double, double>>>& truth = {},
                                                    const TrackOptions& opt = {}) {
  if (!truth.empty() && truth.size() != frames.size()) throw InvalidArgument("ground truth length must match frames");
  std::vector<TrajectorySample> out;
  std::optional<std::pair<double, double>> prev;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto comps = segment(frames[f], signature, opt);
    const auto hint = !truth.empty() && truth[f] ? truth[f] : prev;
    const Component* best = nullptr;
    double best_score = std::numeric_limits<double>::infinity();
    for (const auto& c : comps) {
      const double score = hint ? std::hypot(c.u - hint->first, c.v - hint->second) : -static_cast<double>(c.pixels);
      if (score < best_score) best_score = score, best = &c;
    }
    TrajectorySample s;
    s.frame = static_cast<int>(f);
    if (best && !best->touches_border) {
      s.u = best->u;
      s.v = best->v;
    } else if (!truth.empty() && truth[f]) {
      s.u = truth[f]->first;
      s.v = truth[f]->second;
      s.source = TrackSource::ground_truth;
      const auto& img = frames[f];
      s.off_screen = s.u < 0 || s.v < 0 || s.u > img.width - 1 || s.v > img.height - 1;
    } else if (best) {
      s.u = best->u;
      s.v = best->v;
    } else {
      continue;
    }
    prev = std::make_pair(s.u, s.v);
    out.push_back(s);
  }
  if (out.empty()) throw Error("target not found in any frame");
  return out;
}

inline double distance_traveled(const std::vector<TrajectorySample>& traj) {
  if (traj.size() < 2) throw InvalidArgument("distance_traveled needs at least two samples");
  return std::hypot(traj.back().u - traj.front().u, traj.back().v - traj.front().v);
}

// ---------------------------------------------------------------------------
// Mass study

struct CurvePoint {
  double force = 0, mean = 0, stddev = 0;
  int n = 0;
};

struct LinearFit {
  double slope = 0, intercept = 0, r2 = 0;
};

struct ForceDistanceCurve {
  BallMaterial material = BallMaterial::soccer;
  std::vector<CurvePoint> points;
  LinearFit fit;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

struct MassStudyConfig {
  std::vector<double> forces{0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};
  int repeats = 10;
  std::vector<int> surfaces{0, 1};     // ground texture ids
  std::vector<int> colors{0, 54};      // ball color ids
  std::uint64_t seed = 1;
  double scale = 0.25;
  int parallelism = 1;
  VideoDims dims{};
};

struct MassCell {
  std::string id;
  BallMaterial material;
  int surface = 0, color = 0, repeat = 0;
  double force = 0;
  double tracked_px = 0;        // segmentation-based distance
  double truth_px = 0;          // projected ground-truth distance
  double world_m = 0;           // simulated distance
  double closed_form_m = 0;     // constant-deceleration distance at the last frame
  int fallback_frames = 0;
};

struct MassStudyResult {
  std::vector<MassCell> cells;
  ForceDistanceCurve soccer, bowling;
  bool ordering_ok = false;       // soccer > bowling at every force
  bool monotone_ok = false;       // both curves strictly increasing
  double max_closed_form_rel_error = 0;
  double max_tracker_error_px = 0;
  bool ordering_per_condition_ok = false;  // same check for every surface and color

  std::string csv() const {
    std::ostringstream os;
    os << "material,F,mean,std,n\n";
    os.precision(10);
    for (const auto* c : {&soccer, &bowling})
      for (const auto& p : c->points)
        os << to_string(c->material) << ',' << p.force << ',' << p.mean << ',' << p.stddev << ',' << p.n << '\n';
    return os.str();
  }
};

// Fixed side view of a single ball pushed along +x.
inline CameraModel mass_study_camera(const VideoDims& dims) {
  return orbit_camera({0.0, 0.0, kBallRadius}, -90.0, 20.0, 7.0, 45.0, dims);
}

inline MassCell run_mass_cell(const MassStudyConfig& cfg, BallMaterial material, int surface, int color, double force,
                              int repeat, std::uint64_t cell_seed) {
  const VideoDims dims = cfg.dims.scaled(cfg.scale);
  Rng rng(cell_seed);
  const double x0 = -2.0 + rng.uniform(-0.1, 0.1), y0 = rng.uniform(-0.3, 0.3);
  const auto cam = mass_study_camera(dims);
  const BallParams params;
  const auto frames = simulate_ball({make_ball(material, x0, y0)}, 0, {force, 0.0}, SimClock::for_dims(dims), params);

  SceneGeometry geo;
  geo.ground_texture = surface;
  geo.backdrop = 0;
  geo.ball_colors = {color};
  std::vector<SceneState> states(frames.begin(), frames.end());
  const auto images = render_clip(geo, states, cam, 1);

  std::vector<std::optional<std::pair<double, double>>> truth;
  for (const auto& f : frames) truth.emplace_back(project_point(cam, f[0].position));
  const auto traj = track_centroid(images, ball_color(color), truth);

  MassCell c;
  c.material = material;
  c.surface = surface;
  c.color = color;
  c.force = force;
  c.repeat = repeat;
  std::ostringstream id;
  id << to_string(material) << "/surface" << surface << "/color" << color << "/F" << force << "/r" << repeat;
  c.id = id.str();
  c.tracked_px = distance_traveled(traj);
  c.truth_px = std::hypot(truth.back()->first - truth.front()->first, truth.back()->second - truth.front()->second);
  c.world_m = norm(frames.back()[0].position - frames.front()[0].position);
  const double v0 = map_force_to_impulse(force, params.impulse) / frames.front()[0].mass;
  const double t_end = (dims.frames - 1) / dims.fps, t_stop = v0 / params.rolling_decel;
  c.closed_form_m = t_end >= t_stop ? stopping_distance(v0, params.rolling_decel)
                                    : v0 * t_end - 0.5 * params.rolling_decel * t_end * t_end;
  for (const auto& s : traj) c.fallback_frames += s.source == TrackSource::ground_truth;
  return c;
}

inline MassStudyResult mass_study(const MassStudyConfig& cfg) {
  if (cfg.repeats < 1 || cfg.forces.empty() || cfg.surfaces.empty() || cfg.colors.empty())
    throw InvalidArgument("mass study needs forces, repeats, surfaces and colors");
  struct Job {
    BallMaterial material;
    int surface, color, repeat;
    double force;
  };
  std::vector<Job> jobs;
  for (auto m : {BallMaterial::soccer, BallMaterial::bowling})
    for (int s : cfg.surfaces)
      for (int c : cfg.colors)
        for (double f : cfg.forces)
          for (int r = 0; r < cfg.repeats; ++r) jobs.push_back({m, s, c, r, f});

  MassStudyResult res;
  res.cells.resize(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), cfg.parallelism, [&](std::size_t i) {
    const auto& j = jobs[i];
    try {
      res.cells[i] = run_mass_cell(cfg, j.material, j.surface, j.color, j.force, j.repeat, derive_seed(cfg.seed, i));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (!errors[i].empty()) throw Error("mass study cell " + std::to_string(i) + " failed: " + errors[i]);

  auto curve = [&](BallMaterial m) {
    ForceDistanceCurve c;
    c.material = m;
    std::vector<double> xs, ys;
    for (double f : cfg.forces) {
      std::vector<double> d;
      for (const auto& cell : res.cells)
        if (cell.material == m && cell.force == f) d.push_back(cell.tracked_px);
      CurvePoint p;
      p.force = f;
      p.n = static_cast<int>(d.size());
      p.mean = std::accumulate(d.begin(), d.end(), 0.0) / p.n;
      double var = 0;
      for (double x : d) var += (x - p.mean) * (x - p.mean);
      p.stddev = p.n > 1 ? std::sqrt(var / (p.n - 1)) : 0.0;
      c.points.push_back(p);
      xs.push_back(f);
      ys.push_back(p.mean);
    }
    c.fit = fit_line(xs, ys);
    return c;
  };
  res.soccer = curve(BallMaterial::soccer);
  res.bowling = curve(BallMaterial::bowling);

  res.ordering_ok = true;
  res.monotone_ok = true;
  for (std::size_t i = 0; i < cfg.forces.size(); ++i) {
    res.ordering_ok &= res.soccer.points[i].mean > res.bowling.points[i].mean;
    if (i > 0) {
      res.monotone_ok &= res.soccer.points[i].mean > res.soccer.points[i - 1].mean;
      res.monotone_ok &= res.bowling.points[i].mean > res.bowling.points[i - 1].mean;
    }
  }
  res.ordering_per_condition_ok = true;
  for (int s : cfg.surfaces)
    for (int c : cfg.colors)
      for (double f : cfg.forces) {
        double sum[2] = {0, 0};
        for (const auto& cell : res.cells)
          if (cell.surface == s && cell.color == c && cell.force == f)
            sum[cell.material == BallMaterial::soccer ? 0 : 1] += cell.tracked_px;
        res.ordering_per_condition_ok &= sum[0] > sum[1];
      }
  for (const auto& cell : res.cells) {
    res.max_closed_form_rel_error =
        std::max(res.max_closed_form_rel_error, std::abs(cell.world_m - cell.closed_form_m) / cell.closed_form_m);
    res.max_tracker_error_px = std::max(res.max_tracker_error_px, std::abs(cell.tracked_px - cell.truth_px));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Distribution audit

struct FieldAudit {
  std::string field;
  std::string test;  // chi-square, ks, degenerate
  double statistic = 0;
  double p_value = 1;
  std::size_t n = 0;
  bool pass = true;
  std::string note;
};

struct AuditReport {
  Scenario scenario = Scenario::ball;
  std::size_t samples = 0;
  std::vector<FieldAudit> fields;

  bool pass() const {
    return std::all_of(fields.begin(), fields.end(), [](const FieldAudit& f) { return f.pass; });
  }
};

inline constexpr double kAuditAlpha = 0.01;

inline std::vector<std::string> audit_fields(Scenario sc) {
  switch (sc) {
    case Scenario::flag: return {"flag_count", "backdrop", "flag_color", "wind_direction", "wind_speed"};
    case Scenario::ball: return {"ball_count", "soccer_fraction", "ball_color", "ground_texture", "force_angle", "force_magnitude"};
    default: return {"contact_segment", "force_angle", "force_magnitude"};
  }
}

inline AuditReport audit_distributions(const std::vector<SceneSpec>& specs, const AblationConfig& ab,
                                       std::vector<std::string> fields = {}, std::size_t min_samples = 1000) {
  if (specs.size() < min_samples)
    throw InvalidArgument("audit needs at least " + std::to_string(min_samples) + " samples");
  const Scenario sc = scenario_of(specs.front());
  for (const auto& s : specs)
    if (scenario_of(s) != sc) throw InvalidArgument("audit needs a single scenario");
  const auto known = audit_fields(sc);
  if (fields.empty()) fields = known;
  for (const auto& f : fields)
    if (std::find(known.begin(), known.end(), f) == known.end())
      throw InvalidArgument("unknown audit field for " + std::string(to_string(sc)) + ": " + f);

  AuditReport rep;
  rep.scenario = sc;
  rep.samples = specs.size();

  auto categorical = [&](const std::string& name, const std::vector<long long>& xs, long long lo, long long hi,
                         std::optional<long long> degenerate_value) {
    FieldAudit a;
    a.field = name;
    a.n = xs.size();
    if (degenerate_value) {
      a.test = "degenerate";
      a.pass = std::all_of(xs.begin(), xs.end(), [&](long long x) { return x == *degenerate_value; });
      a.p_value = a.pass ? 1.0 : 0.0;
      a.note = "ablation pins this field to " + std::to_string(*degenerate_value);
    } else {
      const auto r = chi_square_uniform_int(xs, lo, hi);
      a.test = "chi-square";
      a.statistic = r.statistic;
      a.p_value = r.p_value;
      a.pass = r.p_value > kAuditAlpha;
    }
    rep.fields.push_back(a);
  };
  auto continuous = [&](const std::string& name, const std::vector<double>& xs, double lo, double hi) {
    const auto r = ks_uniform(xs, lo, hi);
    rep.fields.push_back({name, "ks", r.statistic, r.p_value, xs.size(), r.p_value > kAuditAlpha, ""});
  };
  auto want = [&](const std::string& f) { return std::find(fields.begin(), fields.end(), f) != fields.end(); };

  if (sc == Scenario::flag) {
    std::vector<long long> count, bg, color;
    std::vector<double> dir, speed;
    for (const auto& s : specs) {
      const auto& f = std::get<FlagSceneSpec>(s);
      count.push_back(f.requested_count);
      bg.push_back(f.backdrop);
      for (const auto& p : f.flags) color.push_back(p.color_id);
      dir.push_back(f.wind_direction_deg);
      speed.push_back(f.wind_speed);
    }
    if (want("flag_count")) categorical("flag_count", count, 1, 64, ab.single_flag ? std::optional<long long>(1) : std::nullopt);
    if (want("backdrop")) categorical("backdrop", bg, 0, kBackdropCount - 1, ab.single_background ? std::optional<long long>(0) : std::nullopt);
    if (want("flag_color")) categorical("flag_color", color, 0, kFlagColorCount - 1, std::nullopt);
    if (want("wind_direction")) continuous("wind_direction", dir, 0.0, 360.0);
    if (want("wind_speed")) continuous("wind_speed", speed, 0.0, 1.0);
  } else if (sc == Scenario::ball) {
    std::vector<long long> count, color, ground;
    std::vector<double> materials{0, 0}, angle, mag;
    for (const auto& s : specs) {
      const auto& b = std::get<BallSceneSpec>(s);
      count.push_back(static_cast<long long>(b.balls.size()));
      color.push_back(b.balls.front().color_id);
      ground.push_back(b.ground_texture);
      for (const auto& p : b.balls) materials[p.material == BallMaterial::soccer ? 0 : 1] += 1;
      angle.push_back(b.force_angle_deg);
      mag.push_back(b.force_magnitude);
    }
    if (want("ball_count")) categorical("ball_count", count, 2, 4, ab.no_distractors ? std::optional<long long>(1) : std::nullopt);
    if (want("soccer_fraction")) {
      const auto r = chi_square_test(materials, {2.0 / 3.0, 1.0 / 3.0});
      const auto total = static_cast<std::size_t>(materials[0] + materials[1]);
      rep.fields.push_back({"soccer_fraction", "chi-square", r.statistic, r.p_value, total, r.p_value > kAuditAlpha,
                            "observed " + std::to_string(materials[0] / static_cast<double>(total))});
    }
    if (want("ball_color")) categorical("ball_color", color, 0, kBallColorCount - 1, std::nullopt);
    if (want("ground_texture")) categorical("ground_texture", ground, 0, kGroundTextureCount - 1, std::nullopt);
    if (want("force_angle")) continuous("force_angle", angle, 0.0, 360.0);
    if (want("force_magnitude")) continuous("force_magnitude", mag, 0.0, 1.0);
  } else {
    std::vector<long long> contact;
    std::vector<double> angle, mag;
    for (const auto& s : specs) {
      const auto& p = std::get<PlantSceneSpec>(s);
      contact.push_back(static_cast<long long>(p.contact_segment));
      angle.push_back(p.force_angle_deg);
      mag.push_back(p.force_magnitude);
    }
    if (want("contact_segment")) categorical("contact_segment", contact, 0, PlantRanges{}.segments - 1, std::nullopt);
    if (want("force_angle")) continuous("force_angle", angle, 0.0, 360.0);
    if (want("force_magnitude")) continuous("force_magnitude", mag, 0.0, 1.0);
  }
  return rep;
}

inline AuditReport audit_distributions(const Plan& plan, std::vector<std::string> fields = {}) {
  std::vector<SceneSpec> specs;
  specs.reserve(plan.entries.size());
  for (const auto& e : plan.entries) specs.push_back(e.spec);
  return audit_distributions(specs, plan.ablation, std::move(fields));
}

inline ojson to_json(const FieldAudit& a) {
  return {{"field", a.field}, {"test", a.test}, {"statistic", a.statistic}, {"p_value", a.p_value},
          {"n", a.n},         {"pass", a.pass}, {"note", a.note}};
}

}  // namespace forceforge
