#include <gtest/gtest.h>

#include <set>

#include "forceforge/render.hpp"

using namespace forceforge;

namespace {

VideoDims small_dims(int frames = 49) {
  VideoDims d = VideoDims{}.scaled(0.5);
  d.frames = frames;
  return d;
}

CameraModel test_camera(const VideoDims& d) { return orbit_camera({0, 0, kBallRadius}, -90.0, 35.0, 5.0, 45.0, d); }

// Centroid of pixels whose chromaticity is close to `c`. Shading only scales
// a color, so chromaticity survives lighting and panel darkening.
std::pair<double, double> chroma_centroid(const Image& img, const ColorF& c, int* count = nullptr) {
  const double cs = c.r + c.g + c.b;
  double su = 0, sv = 0;
  int n = 0;
  for (int r = 0; r < img.height; ++r)
    for (int col = 0; col < img.width; ++col) {
      const auto p = img.pixel(col, r);
      const double s = p[0] + p[1] + p[2];
      if (s < 40) continue;
      const double d = std::abs(p[0] / s - c.r / cs) + std::abs(p[1] / s - c.g / cs) + std::abs(p[2] / s - c.b / cs);
      if (d < 0.08) {
        su += col;
        sv += r;
        ++n;
      }
    }
  if (count) *count = n;
  return {n ? su / n : -1, n ? sv / n : -1};
}

SceneGeometry ball_scene(std::vector<int> colors) {
  SceneGeometry s;
  s.ground_texture = 5;
  s.backdrop = 3;
  s.ball_colors = std::move(colors);
  return s;
}

}  // namespace

TEST(Catalog, CountsAndBounds) {
  std::set<Rgb> balls, flags;
  for (int i = 0; i < kBallColorCount; ++i) balls.insert(to_rgb(ball_color(i)));
  for (int i = 0; i < kFlagColorCount; ++i) flags.insert(to_rgb(flag_color(i)));
  EXPECT_EQ(balls.size(), 108u);
  EXPECT_EQ(flags.size(), 100u);
  EXPECT_THROW(ball_color(108), InvalidArgument);
  EXPECT_THROW(flag_color(-1), InvalidArgument);
  EXPECT_THROW(ground_texture(42), InvalidArgument);
  EXPECT_THROW(backdrop(50), InvalidArgument);
  EXPECT_NO_THROW(backdrop(49));
}

TEST(Catalog, BallColorsSaturatedGroundsMuted) {
  auto sat = [](const ColorF& c) {
    const double mx = std::max({c.r, c.g, c.b}), mn = std::min({c.r, c.g, c.b});
    return std::make_pair(mx > 0 ? (mx - mn) / mx : 0.0, mx);
  };
  for (int i = 0; i < kBallColorCount; ++i) {
    auto [s, v] = sat(ball_color(i));
    EXPECT_GE(s * v, 0.9 - 1e-12) << i;
  }
  for (int i = 0; i < kGroundTextureCount; ++i) {
    const auto t = ground_texture(i);
    EXPECT_LE(sat(t.a).first, 0.12 + 1e-12);
    EXPECT_LE(sat(t.b).first, 0.12 + 1e-12);
  }
}

TEST(Catalog, EntriesArePure) {
  EXPECT_EQ(ground_texture(7).sample(1.3, -0.4), ground_texture(7).sample(1.3, -0.4));
  EXPECT_EQ(backdrop(11).sample(0.3, 0.2), backdrop(11).sample(0.3, 0.2));
  std::set<TextureFamily> families;
  for (int i = 0; i < kGroundTextureCount; ++i) families.insert(ground_texture(i).family);
  EXPECT_EQ(families.size(), 3u);
}

TEST(Render, EmptySceneIsBackground) {
  const auto cam = test_camera(small_dims());
  const auto scene = ball_scene({});
  const auto img = render_frame(scene, std::vector<BallState>{}, cam);
  EXPECT_EQ(img, render_background(scene, cam));
}

TEST(Render, SphereAtTargetIsCentered) {
  const auto d = small_dims();
  const auto cam = test_camera(d);
  auto ball = make_ball(BallMaterial::bowling, 0, 0);
  const auto img = render_frame(ball_scene({0}), std::vector<BallState>{ball}, cam);
  int n = 0;
  auto [u, v] = chroma_centroid(img, ball_color(0), &n);
  EXPECT_GT(n, 50);
  EXPECT_NEAR(u, d.width / 2.0, 1.0);
  EXPECT_NEAR(v, d.height / 2.0, 1.0);
}

TEST(Render, SilhouettesAgreeWithProjection) {
  const auto d = small_dims();
  const auto cam = test_camera(d);
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    auto ball = make_ball(BallMaterial::bowling, rng.uniform(-1.5, 1.5), rng.uniform(-1, 1));
    const int color = static_cast<int>(rng.uniform_int(0, kBallColorCount - 1));
    const auto img = render_frame(ball_scene({color}), std::vector<BallState>{ball}, cam);
    auto [u, v] = chroma_centroid(img, ball_color(color));
    auto [pu, pv] = project_point(cam, ball.position);
    EXPECT_NEAR(u, pu, 1.0) << i;
    EXPECT_NEAR(v, pv, 1.0) << i;
  }
}

TEST(Render, DeterministicPngBytes) {
  const auto cam = test_camera(small_dims());
  std::vector<BallState> balls{make_ball(BallMaterial::soccer, 0, 0), make_ball(BallMaterial::bowling, 0.6, 0.3)};
  const auto a = encode_png(render_frame(ball_scene({3, 60}), balls, cam));
  const auto b = encode_png(render_frame(ball_scene({3, 60}), balls, cam));
  EXPECT_EQ(a, b);
}

TEST(Render, ClipLengthMustMatch) {
  const auto cam = test_camera(small_dims(3));
  std::vector<SceneState> states(2, std::vector<BallState>{});
  EXPECT_THROW(render_clip(ball_scene({}), states, cam), InvalidArgument);
}

TEST(Render, StationaryClipFramesIdenticalUnderAnyThreadCount) {
  const auto cam = test_camera(small_dims(4));
  std::vector<SceneState> states(4, std::vector<BallState>{make_ball(BallMaterial::soccer, 0.2, 0.1)});
  const auto one = render_clip(ball_scene({9}), states, cam, 1);
  const auto four = render_clip(ball_scene({9}), states, cam, 4);
  ASSERT_EQ(one.size(), 4u);
  EXPECT_EQ(one, four);
  for (const auto& f : one) EXPECT_EQ(f, one.front());
}

TEST(Render, BallMovingRightMovesSilhouetteRight) {
  const auto d = small_dims(12);
  const auto cam = test_camera(d);
  auto frames = simulate_ball({make_ball(BallMaterial::soccer, -1.0, 0)}, 0, {1.0, 0.0}, SimClock::for_dims(d));
  std::vector<SceneState> states(frames.begin(), frames.end());
  const auto clip = render_clip(ball_scene({12}), states, cam, 2);
  double prev = -1;
  for (const auto& img : clip) {
    const double u = chroma_centroid(img, ball_color(12)).first;
    EXPECT_GT(u, prev);
    prev = u;
  }
}

TEST(Render, FlagAndPlantAppear) {
  const auto d = small_dims();
  const auto cam = orbit_camera({0, 0, 0.8}, -90.0, 15.0, 5.0, 45.0, d);
  SceneGeometry flags = ball_scene({});
  flags.flag_colors = {40};
  auto flag = make_flag({0, 0, 0}, 1.6, 0.9, 0.6, 7, 10, 0.0, 0.1);
  int n = 0;
  chroma_centroid(render_frame(flags, std::vector<ClothState>{flag}, cam), flag_color(40), &n);
  EXPECT_GT(n, 200);

  SceneGeometry plant = ball_scene({});
  auto chain = make_plant({0, 0, kPotHeight + kPotRadius});
  chroma_centroid(render_frame(plant, chain, cam), plant.flower_color, &n);
  EXPECT_GT(n, 10);
}

TEST(Render, ColorCountMismatchThrows) {
  const auto cam = test_camera(small_dims());
  EXPECT_THROW(render_frame(ball_scene({1, 2}), std::vector<BallState>{make_ball(BallMaterial::soccer, 0, 0)}, cam),
               InvalidArgument);
}
