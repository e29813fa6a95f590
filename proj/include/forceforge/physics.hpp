#pragma once

// Scenario simulators: impulse-driven rolling balls, wind-driven cloth flags
// and a poked elastic chain standing in for a plant stem.
//
// World frame: ground plane z = 0, z up, lengths in meters, time in seconds.
// Every simulator is single-threaded and a pure function of its inputs.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "forceforge/core.hpp"
#include "forceforge/vec3.hpp"

namespace forceforge {

// Output sampling: `frames` states spaced 1/fps apart, each frame interval
// split into `substeps` integrator steps of length dt.
struct SimClock {
  double fps = 8.0;
  int frames = 49;
  int substeps = 8;

  double dt() const { return 1.0 / (fps * substeps); }
  double duration() const { return frames / fps; }

  void validate() const {
    if (!(fps > 0.0)) throw InvalidArgument("SimClock: fps must be positive");
    if (frames < 1) throw InvalidArgument("SimClock: frames must be >= 1");
    if (substeps < 1) throw InvalidArgument("SimClock: substeps must be >= 1");
  }

  static SimClock for_dims(const VideoDims& d, int substeps = 8) { return {d.fps, d.frames, substeps}; }
};

// Cloth springs stiff enough to keep strain low need a finer step than the
// ball and chain models.
inline constexpr int kClothSubsteps = 32;

// Affine map from the dimensionless prompt magnitude to a physical impulse.
// j_min > 0 keeps F = 0 a gentle but real push.
struct ImpulseScale {
  double j_min = 0.172;  // N*s
  double j_max = 0.86;   // N*s

  void validate() const {
    if (!(j_min > 0.0) || !(j_max >= j_min)) throw InvalidArgument("ImpulseScale: need 0 < j_min <= j_max");
  }
};

inline double map_force_to_impulse(double magnitude, const ImpulseScale& scale = {}) {
  detail::checked_magnitude(magnitude);
  return scale.j_min + (scale.j_max - scale.j_min) * magnitude;
}

// ---------------------------------------------------------------------------
// Rolling balls

enum class BallMaterial { soccer, bowling };

inline constexpr double kSoccerMass = 0.43;  // kg at the default radius
inline constexpr double kBallRadius = 0.11;  // m
inline constexpr double kBowlingMassRatio = 4.0;

inline const char* to_string(BallMaterial m) { return m == BallMaterial::soccer ? "soccer" : "bowling"; }

struct BallState {
  Vec3 position;  // center; z == radius while on the ground
  Vec3 velocity;
  double radius = kBallRadius;
  double mass = kSoccerMass;
  BallMaterial material = BallMaterial::soccer;

  bool operator==(const BallState&) const = default;
};

// A ball resting on the ground. Bowling balls weigh four times a soccer ball
// of the same radius.
inline BallState make_ball(BallMaterial material, double x, double y, double radius = kBallRadius,
                           double soccer_mass = kSoccerMass) {
  BallState b;
  b.position = {x, y, radius};
  b.radius = radius;
  b.mass = material == BallMaterial::bowling ? kBowlingMassRatio * soccer_mass : soccer_mass;
  b.material = material;
  return b;
}

struct BallParams {
  double rolling_decel = 0.5;  // mu_r * g, m/s^2
  double restitution = 0.9;
  ImpulseScale impulse{};

  void validate() const {
    if (!(rolling_decel > 0.0)) throw InvalidArgument("BallParams: rolling_decel must be positive");
    if (restitution < 0.0 || restitution > 1.0) throw InvalidArgument("BallParams: restitution must be in [0,1]");
    impulse.validate();
  }
};

// Horizontal push on the target ball at t = 0.
struct BallImpulse {
  double magnitude = 0.5;        // prompt F in [0,1]
  double angle_world_deg = 0.0;  // direction in the ground plane, from +x toward +y
};

using BallFrames = std::vector<std::vector<BallState>>;

inline double stopping_distance(double v0, double decel) { return v0 * v0 / (2.0 * decel); }

// Frictionless impulse exchange between two touching spheres. Returns true
// if the pair was approaching and an impulse was applied. Overlap is removed
// by moving both centers apart in inverse proportion to mass.
inline bool resolve_collision(BallState& a, BallState& b, double restitution) {
  Vec3 d = b.position - a.position;
  d.z = 0.0;
  const double dist = norm(d);
  const double reach = a.radius + b.radius;
  if (dist >= reach || dist == 0.0) return false;
  const Vec3 n = d / dist;
  const double inv_a = 1.0 / a.mass, inv_b = 1.0 / b.mass;
  const double closing = dot(b.velocity - a.velocity, n);
  bool hit = false;
  if (closing < 0.0) {
    const double j = -(1.0 + restitution) * closing / (inv_a + inv_b);
    a.velocity -= n * (j * inv_a);
    b.velocity += n * (j * inv_b);
    hit = true;
  }
  const double overlap = reach - dist;
  a.position -= n * (overlap * inv_a / (inv_a + inv_b));
  b.position += n * (overlap * inv_b / (inv_a + inv_b));
  return hit;
}

namespace detail {

// Constant deceleration opposing horizontal motion, integrated exactly.
inline void roll(BallState& b, double decel, double dt) {
  Vec3 v = b.velocity;
  v.z = 0.0;
  const double speed = norm(v);
  if (speed == 0.0) return;
  const Vec3 dir = v / speed;
  if (speed <= decel * dt) {
    b.position += dir * stopping_distance(speed, decel);
    b.velocity = {};
  } else {
    b.position += v * dt - dir * (0.5 * decel * dt * dt);
    b.velocity = v - dir * (decel * dt);
  }
}

}  // namespace detail

inline void validate_balls(const std::vector<BallState>& balls) {
  for (std::size_t i = 0; i < balls.size(); ++i) {
    if (!(balls[i].mass > 0.0)) throw InvalidArgument("ball " + std::to_string(i) + ": mass must be positive");
    if (!(balls[i].radius > 0.0)) throw InvalidArgument("ball " + std::to_string(i) + ": radius must be positive");
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      Vec3 d = balls[j].position - balls[i].position;
      d.z = 0.0;
      if (norm(d) < balls[i].radius + balls[j].radius)
        throw InvalidArgument("balls " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    }
  }
}

// Pushes balls[target] at t = 0 and rolls every ball until the clip ends.
// Frame 0 holds the initial positions with the post-impulse velocity.
inline BallFrames simulate_ball(std::vector<BallState> balls, std::size_t target, const BallImpulse& impulse,
                                const SimClock& clock, const BallParams& params = {}) {
  clock.validate();
  params.validate();
  validate_balls(balls);
  if (target >= balls.size()) throw InvalidArgument("target index out of range");
  for (std::size_t i = 0; i < balls.size(); ++i)
    if (i != target && norm(balls[i].velocity) != 0.0)
      throw InvalidArgument("distractor balls must start at rest");

  const double j = map_force_to_impulse(impulse.magnitude, params.impulse);
  balls[target].velocity += ground_direction(impulse.angle_world_deg) * (j / balls[target].mass);

  const double dt = clock.dt();
  BallFrames out;
  out.reserve(clock.frames);
  out.push_back(balls);
  for (int f = 1; f < clock.frames; ++f) {
    for (int s = 0; s < clock.substeps; ++s) {
      for (auto& b : balls) detail::roll(b, params.rolling_decel, dt);
      for (std::size_t a = 0; a < balls.size(); ++a)
        for (std::size_t b = a + 1; b < balls.size(); ++b) resolve_collision(balls[a], balls[b], params.restitution);
    }
    out.push_back(balls);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cloth

enum class SpringKind { structural, shear, bend };

struct Spring {
  int a = 0, b = 0;
  double rest = 0.0;
  SpringKind kind = SpringKind::structural;
};

struct ClothVertex {
  Vec3 position;
  Vec3 velocity;
  bool pinned = false;

  bool operator==(const ClothVertex&) const = default;
};

// A rows x cols vertex grid; vertex (r, c) lives at index r * cols + c.
struct ClothState {
  int rows = 0, cols = 0;
  double vertex_mass = 0.0;
  std::vector<ClothVertex> vertices;
  std::shared_ptr<const std::vector<Spring>> springs;  // topology shared by every frame

  const ClothVertex& vertex(int r, int c) const { return vertices[static_cast<std::size_t>(r) * cols + c]; }
  bool operator==(const ClothState& o) const {
    return rows == o.rows && cols == o.cols && vertex_mass == o.vertex_mass && vertices == o.vertices;
  }
};

struct GustModel {
  double amplitude = 0.0;         // relative speed fluctuation; 0 disables gusts
  double correlation_time = 1.0;  // s
};

struct WindField {
  double speed = 0.0;          // dimensionless, [0,1]
  double direction_deg = 0.0;  // world direction the wind blows toward
  GustModel gust{};
  std::uint64_t seed = 0;  // drives the gust noise

  void validate() const {
    if (!std::isfinite(speed) || speed < 0.0 || speed > 1.0) throw InvalidArgument("WindField: speed must be in [0,1]");
    if (gust.amplitude < 0.0 || !(gust.correlation_time > 0.0)) throw InvalidArgument("WindField: bad gust model");
  }
};

struct ClothParams {
  double structural_stiffness = 60.0;  // N/m
  double shear_stiffness = 15.0;
  double bend_stiffness = 6.0;
  double spring_damping = 0.02;   // N*s/m along each spring
  double air_damping = 0.004;     // N*s/m per vertex
  double wind_coefficient = 0.012;  // N per vertex at unit speed and head-on incidence
  double wind_max_speed = 1.0;
  double gravity = 9.81;
  double divergence_bound = 1e3;  // |coordinate| beyond this aborts the run
};

// A flag hanging from a vertical pole. The pole edge (column 0) is pinned;
// the cloth extends horizontally along `yaw_deg` from the pole top down.
inline ClothState make_flag(const Vec3& pole_base, double pole_height, double width, double height, int rows,
                            int cols, double yaw_deg, double mass) {
  if (rows < 2 || cols < 2) throw InvalidArgument("make_flag: need at least a 2x2 grid");
  if (!(width > 0.0) || !(height > 0.0) || !(mass > 0.0)) throw InvalidArgument("make_flag: bad size or mass");
  if (height > pole_height) throw InvalidArgument("make_flag: flag taller than pole");
  ClothState cloth;
  cloth.rows = rows;
  cloth.cols = cols;
  cloth.vertex_mass = mass / (rows * cols);
  const Vec3 along = ground_direction(yaw_deg);
  const Vec3 top = pole_base + Vec3{0, 0, pole_height};
  const double dx = width / (cols - 1), dz = height / (rows - 1);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) cloth.vertices.push_back({top + along * (c * dx) - Vec3{0, 0, r * dz}, {}, c == 0});

  auto springs = std::make_shared<std::vector<Spring>>();
  auto idx = [cols](int r, int c) { return r * cols + c; };
  auto add = [&](int r0, int c0, int r1, int c1, SpringKind kind) {
    if (r1 < 0 || r1 >= rows || c1 < 0 || c1 >= cols) return;
    const int a = idx(r0, c0), b = idx(r1, c1);
    springs->push_back({a, b, norm(cloth.vertices[b].position - cloth.vertices[a].position), kind});
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      add(r, c, r, c + 1, SpringKind::structural);
      add(r, c, r + 1, c, SpringKind::structural);
      add(r, c, r + 1, c + 1, SpringKind::shear);
      add(r, c, r + 1, c - 1, SpringKind::shear);
      add(r, c, r, c + 2, SpringKind::bend);
      add(r, c, r + 2, c, SpringKind::bend);
    }
  cloth.springs = std::move(springs);
  return cloth;
}

// Unit normals from central differences over the grid.
inline std::vector<Vec3> cloth_normals(const ClothState& cloth) {
  std::vector<Vec3> normals(cloth.vertices.size());
  for (int r = 0; r < cloth.rows; ++r)
    for (int c = 0; c < cloth.cols; ++c) {
      const Vec3 across = cloth.vertex(r, std::min(c + 1, cloth.cols - 1)).position -
                          cloth.vertex(r, std::max(c - 1, 0)).position;
      const Vec3 down = cloth.vertex(std::min(r + 1, cloth.rows - 1), c).position -
                        cloth.vertex(std::max(r - 1, 0), c).position;
      normals[static_cast<std::size_t>(r) * cloth.cols + c] = normalized(cross(across, down));
    }
  return normals;
}

inline double max_kinetic_energy(const ClothState& cloth) {
  double m = 0.0;
  for (const auto& v : cloth.vertices) m = std::max(m, 0.5 * cloth.vertex_mass * dot(v.velocity, v.velocity));
  return m;
}

// Largest structural spring length over its rest length.
inline double max_structural_strain(const ClothState& cloth) {
  double worst = 0.0;
  for (const auto& s : *cloth.springs)
    if (s.kind == SpringKind::structural)
      worst = std::max(worst, norm(cloth.vertices[s.b].position - cloth.vertices[s.a].position) / s.rest);
  return worst;
}

// Semi-implicit Euler over springs, damping, gravity and wind. Wind pushes
// each vertex along its normal, oriented to face the wind, with strength
// proportional to max(0, n.w). Frame 0 is the input (rest) configuration.
inline std::vector<ClothState> simulate_cloth(ClothState cloth, const WindField& wind, const SimClock& clock,
                                              const ClothParams& params = {}) {
  clock.validate();
  wind.validate();
  if (!cloth.springs || cloth.vertices.empty()) throw InvalidArgument("simulate_cloth: empty cloth");
  if (std::none_of(cloth.vertices.begin(), cloth.vertices.end(), [](const auto& v) { return v.pinned; }))
    throw InvalidArgument("simulate_cloth: at least one vertex must be pinned");
  for (const auto& s : *cloth.springs)
    if (!(s.rest > 0.0)) throw InvalidArgument("simulate_cloth: spring rest lengths must be positive");

  const double dt = clock.dt();
  const double m = cloth.vertex_mass;
  const Vec3 wind_dir = ground_direction(wind.direction_deg);
  const std::size_t n = cloth.vertices.size();
  std::vector<Vec3> force(n);
  Rng gust_rng(wind.seed);
  double gust = 0.0;

  auto stiffness = [&](SpringKind k) {
    switch (k) {
      case SpringKind::structural: return params.structural_stiffness;
      case SpringKind::shear: return params.shear_stiffness;
      default: return params.bend_stiffness;
    }
  };

  std::vector<ClothState> out;
  out.reserve(clock.frames);
  out.push_back(cloth);
  std::size_t step = 0;
  for (int f = 1; f < clock.frames; ++f) {
    for (int s = 0; s < clock.substeps; ++s, ++step) {
      if (wind.gust.amplitude > 0.0) {
        const double tau = wind.gust.correlation_time;
        gust += -gust / tau * dt + wind.gust.amplitude * std::sqrt(2.0 * dt / tau) * gust_rng.normal();
      }
      const double speed = std::max(0.0, wind.speed * (1.0 + gust));
      const double wind_strength = params.wind_coefficient * params.wind_max_speed * speed;

      const auto normals = cloth_normals(cloth);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& v = cloth.vertices[i];
        Vec3 fi{0.0, 0.0, -m * params.gravity};
        fi -= v.velocity * params.air_damping;
        Vec3 nrm = normals[i];
        if (dot(nrm, wind_dir) < 0.0) nrm = -nrm;
        fi += nrm * (wind_strength * std::max(0.0, dot(nrm, wind_dir)));
        force[i] = fi;
      }
      for (const auto& sp : *cloth.springs) {
        const auto& va = cloth.vertices[sp.a];
        const auto& vb = cloth.vertices[sp.b];
        const Vec3 d = vb.position - va.position;
        const double len = norm(d);
        if (len == 0.0) continue;
        const Vec3 u = d / len;
        const double mag = stiffness(sp.kind) * (len - sp.rest) + params.spring_damping * dot(vb.velocity - va.velocity, u);
        force[sp.a] += u * mag;
        force[sp.b] -= u * mag;
      }
      for (std::size_t i = 0; i < n; ++i) {
        auto& v = cloth.vertices[i];
        if (v.pinned) continue;
        v.velocity += force[i] * (dt / m);
        v.position += v.velocity * dt;
        const auto& p = v.position;
        if (!is_finite(p) || !is_finite(v.velocity) || std::abs(p.x) > params.divergence_bound ||
            std::abs(p.y) > params.divergence_bound || std::abs(p.z) > params.divergence_bound)
          throw DivergenceError(step, "cloth vertex " + std::to_string(i) + " left the sanity bound");
      }
    }
    out.push_back(cloth);
  }
  return out;
}

// Downwind displacement of the free edge (last column) from frame 0,
// averaged over every row and frame.
inline double mean_free_edge_deflection(const std::vector<ClothState>& series, double wind_direction_deg) {
  if (series.empty()) return 0.0;
  const Vec3 dir = ground_direction(wind_direction_deg);
  const auto& rest = series.front();
  double sum = 0.0;
  for (const auto& s : series)
    for (int r = 0; r < s.rows; ++r)
      sum += dot(s.vertex(r, s.cols - 1).position - rest.vertex(r, rest.cols - 1).position, dir);
  return sum / (static_cast<double>(series.size()) * rest.rows);
}

// ---------------------------------------------------------------------------
// Elastic chain (plant stem surrogate)
//
// A planar chain of rigid segments rising from `base` in the world x-z plane.
// Each joint is a torsional spring-damper; each segment carries a point mass
// at its tip. The model is linearized about the upright rest pose, which
// makes it a linear system M q'' + C q' + K q = 0 in the joint angles.

struct ChainSegment {
  double angle = 0.0;             // joint angle relative to the parent segment, rad
  double angular_velocity = 0.0;  // rad/s

  bool operator==(const ChainSegment&) const = default;
};

struct ChainState {
  std::vector<ChainSegment> segments;
  Vec3 base;
  double segment_length = 0.12;  // m
  double segment_mass = 0.01;    // kg at each segment tip
  double stiffness = 0.00569;    // N*m/rad per joint
  double damping = 0.0000905;    // N*m*s/rad per joint

  bool operator==(const ChainState&) const = default;

  // Joint positions from the base to the tip (segments + 1 points).
  std::vector<Vec3> node_positions() const {
    std::vector<Vec3> pts{base};
    double absolute = 0.0;
    Vec3 p = base;
    for (const auto& s : segments) {
      absolute += s.angle;
      p += Vec3{std::sin(absolute), 0.0, std::cos(absolute)} * segment_length;
      pts.push_back(p);
    }
    return pts;
  }

  // Linearized horizontal tip displacement of each segment.
  std::vector<double> tip_offsets() const {
    std::vector<double> u;
    double absolute = 0.0, x = 0.0;
    for (const auto& s : segments) {
      absolute += s.angle;
      x += segment_length * absolute;
      u.push_back(x);
    }
    return u;
  }

  double mechanical_energy() const;
};

inline ChainState make_plant(const Vec3& base, int segments = 5) {
  if (segments < 1) throw InvalidArgument("make_plant: need at least one segment");
  ChainState c;
  c.base = base;
  c.segments.assign(static_cast<std::size_t>(segments), {});
  return c;
}

struct ChainPoke {
  double magnitude = 0.5;        // prompt F
  double angle_world_deg = 0.0;  // direction in the x-z plane: 0 = +x, 90 = up
  std::size_t contact_segment = 0;
};

struct ChainParams {
  ImpulseScale impulse{0.0004, 0.002};
};

namespace detail {

struct ChainMatrices {
  Eigen::MatrixXd jacobian;  // d(tip offsets)/d(joint angles)
  Eigen::MatrixXd mass, damping, stiffness;
};

inline ChainMatrices chain_matrices(const ChainState& c) {
  const auto n = static_cast<Eigen::Index>(c.segments.size());
  Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) ones(i, j) = 1.0;
  ChainMatrices m;
  m.jacobian = c.segment_length * ones * ones;
  m.mass = c.segment_mass * m.jacobian.transpose() * m.jacobian;
  m.damping = c.damping * Eigen::MatrixXd::Identity(n, n);
  m.stiffness = c.stiffness * Eigen::MatrixXd::Identity(n, n);
  return m;
}

inline Eigen::VectorXd chain_angles(const ChainState& c) {
  Eigen::VectorXd q(static_cast<Eigen::Index>(c.segments.size()));
  for (std::size_t i = 0; i < c.segments.size(); ++i) q[static_cast<Eigen::Index>(i)] = c.segments[i].angle;
  return q;
}

inline Eigen::VectorXd chain_rates(const ChainState& c) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(c.segments.size()));
  for (std::size_t i = 0; i < c.segments.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = c.segments[i].angular_velocity;
  return v;
}

}  // namespace detail

inline double ChainState::mechanical_energy() const {
  const auto m = detail::chain_matrices(*this);
  const auto q = detail::chain_angles(*this);
  const auto v = detail::chain_rates(*this);
  return 0.5 * v.dot(m.mass * v) + 0.5 * q.dot(m.stiffness * q);
}

inline void validate_chain(const ChainState& c) {
  if (c.segments.empty()) throw InvalidArgument("chain needs at least one segment");
  if (!(c.stiffness > 0.0) || !(c.damping > 0.0)) throw InvalidArgument("chain stiffness and damping must be positive");
  if (!(c.segment_length > 0.0) || !(c.segment_mass > 0.0)) throw InvalidArgument("chain segment length and mass must be positive");
}

// Applies the poke impulse at the contact segment tip and integrates the
// damped response with the implicit midpoint rule, which never increases
// the quadratic energy of a damped linear system. Frame 0 is the state just
// after the poke.
inline std::vector<ChainState> simulate_chain(ChainState chain, const ChainPoke& poke, const SimClock& clock,
                                              const ChainParams& params = {}) {
  clock.validate();
  validate_chain(chain);
  params.impulse.validate();
  if (poke.contact_segment >= chain.segments.size()) throw InvalidArgument("contact segment index out of range");

  const auto mats = detail::chain_matrices(chain);
  Eigen::VectorXd q = detail::chain_angles(chain);
  Eigen::VectorXd v = detail::chain_rates(chain);

  // Component of the poke perpendicular to the contact segment.
  double absolute = 0.0;
  for (std::size_t i = 0; i <= poke.contact_segment; ++i) absolute += chain.segments[i].angle;
  auto [dc, ds] = cos_sin_deg(poke.angle_world_deg);
  const double perpendicular = dc * std::cos(absolute) - ds * std::sin(absolute);
  const double impulse = map_force_to_impulse(poke.magnitude, params.impulse) * perpendicular;
  const Eigen::VectorXd generalized = mats.jacobian.row(static_cast<Eigen::Index>(poke.contact_segment)).transpose() * impulse;
  const Eigen::LDLT<Eigen::MatrixXd> mass_solver(mats.mass);
  v += mass_solver.solve(generalized);

  const double dt = clock.dt();
  const Eigen::MatrixXd lhs = mats.mass + 0.5 * dt * mats.damping + 0.25 * dt * dt * mats.stiffness;
  const Eigen::MatrixXd rhs = mats.mass - 0.5 * dt * mats.damping - 0.25 * dt * dt * mats.stiffness;
  const Eigen::LDLT<Eigen::MatrixXd> step_solver(lhs);

  auto store = [&](ChainState& s) {
    for (std::size_t i = 0; i < s.segments.size(); ++i) {
      s.segments[i].angle = q[static_cast<Eigen::Index>(i)];
      s.segments[i].angular_velocity = v[static_cast<Eigen::Index>(i)];
    }
  };

  std::vector<ChainState> out;
  out.reserve(clock.frames);
  store(chain);
  out.push_back(chain);
  std::size_t step = 0;
  for (int f = 1; f < clock.frames; ++f) {
    for (int s = 0; s < clock.substeps; ++s, ++step) {
      const Eigen::VectorXd v_next = step_solver.solve(rhs * v - dt * (mats.stiffness * q));
      q += 0.5 * dt * (v + v_next);
      v = v_next;
      if (!q.allFinite() || !v.allFinite()) throw DivergenceError(step, "chain state is not finite");
    }
    store(chain);
    out.push_back(chain);
  }
  return out;
}

// Largest linearized tip offset over the whole series.
inline double peak_chain_deflection(const std::vector<ChainState>& series) {
  double peak = 0.0;
  for (const auto& s : series)
    for (double u : s.tip_offsets()) peak = std::max(peak, std::abs(u));
  return peak;
}

}  // namespace forceforge
