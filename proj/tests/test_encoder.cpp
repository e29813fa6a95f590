#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "forceforge/encoder.hpp"
#include "forceforge/tensor_io.hpp"

using namespace forceforge;

namespace {

VideoDims small_dims(int frames = 9, int h = 96, int w = 144) {
  VideoDims d;
  d.frames = frames;
  d.height = h;
  d.width = w;
  return d;
}

// Independent reference: evaluates the blob field of one force at one pixel
// straight from the definition, with std::cos/std::sin on radians.
double reference_intensity(double x, double y, double F, double theta_deg, const VideoDims& d, int frame,
                           int col, int row, double sigma = 10.0, double trunc = 30.0) {
  const double travel = (static_cast<double>(frame) / (d.frames - 1)) * (1.0 / 8.0 + 3.0 / 8.0 * F) * d.width;
  const double th = theta_deg * M_PI / 180.0;
  const double cx = x + travel * std::cos(th);
  const double cy = y - travel * std::sin(th);
  const double d2 = (col - cx) * (col - cx) + (row - cy) * (row - cy);
  if (d2 > trunc * trunc) return 0.0;
  return std::exp(-d2 / (2 * sigma * sigma));
}

// Intensity-weighted centroid of one frame.
std::pair<double, double> centroid(const ControlTensor& t, int frame) {
  double sx = 0, sy = 0, s = 0;
  const auto& d = t.dims();
  for (int r = 0; r < d.height; ++r)
    for (int c = 0; c < d.width; ++c) {
      const double v = t.at(frame, 0, r, c);
      sx += v * c;
      sy += v * r;
      s += v;
    }
  return {sx / s, sy / s};
}

double frame_sum(const ControlTensor& t, int frame) {
  auto p = t.plane(frame, 0);
  return std::accumulate(p.begin(), p.end(), 0.0);
}

double max_abs_diff(const ControlTensor& a, const ControlTensor& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.values()[i]) - b.values()[i]));
  return m;
}

}  // namespace

TEST(EncodeGlobal, ReferenceExamples) {
  const auto d = small_dims(4, 6, 8);
  auto t = encode_global(GlobalForcePrompt::create(0.5, 90), d);
  for (float v : t.plane(3, 0)) EXPECT_EQ(v, 0.0f);
  for (float v : t.plane(3, 1)) EXPECT_EQ(v, 0.0f);
  for (float v : t.plane(3, 2)) EXPECT_EQ(v, 1.0f);

  t = encode_global(GlobalForcePrompt::create(0.0, 0), d);
  EXPECT_EQ(t.at(0, 0, 0, 0), -1.0f);
  EXPECT_EQ(t.at(1, 1, 5, 7), 1.0f);
  EXPECT_EQ(t.at(2, 2, 3, 3), 0.0f);

  t = encode_global(GlobalForcePrompt::create(1.0, 180), d);
  EXPECT_EQ(t.at(0, 0, 2, 2), 1.0f);
  EXPECT_EQ(t.at(0, 1, 2, 2), -1.0f);
  EXPECT_EQ(t.at(0, 2, 2, 2), 0.0f);
}

TEST(EncodeGlobal, ConstantPerChannelAndUnitCircle) {
  const auto d = small_dims(3, 5, 7);
  for (double F : {0.0, 0.3, 1.0})
    for (double th : {0.0, 17.5, 123.0, 359.0}) {
      auto t = encode_global(GlobalForcePrompt::create(F, th), d);
      for (int ch = 0; ch < 3; ++ch) {
        const float first = t.at(0, ch, 0, 0);
        for (int f = 0; f < d.frames; ++f)
          for (float v : t.plane(f, ch)) ASSERT_EQ(v, first);
      }
      const double c1 = t.at(0, 1, 0, 0), c2 = t.at(0, 2, 0, 0);
      EXPECT_NEAR(c1 * c1 + c2 * c2, 1.0, 1e-6);
      EXPECT_GE(t.at(0, 0, 0, 0), -1.0f);
      EXPECT_LE(t.at(0, 0, 0, 0), 1.0f);
    }
}

TEST(EncodeGlobal, WrapAroundIsContinuous) {
  const auto d = small_dims(2, 2, 2);
  auto a = encode_global(GlobalForcePrompt::create(0.4, 359.9999999), d);
  auto b = encode_global(GlobalForcePrompt::create(0.4, 0.0), d);
  EXPECT_LE(max_abs_diff(a, b), 1e-8);
}

TEST(EncodeGlobal, LipschitzInMagnitude) {
  const auto d = small_dims(2, 2, 2);
  for (double F = 0.0; F < 0.99; F += 0.05) {
    auto a = encode_global(GlobalForcePrompt::create(F, 40), d);
    auto b = encode_global(GlobalForcePrompt::create(F + 0.01, 40), d);
    EXPECT_LE(max_abs_diff(a, b), 2 * 0.01 + 1e-6);
  }
}

TEST(EncodeGlobal, RejectsBadChannels) {
  VideoDims d = small_dims();
  d.channels = 1;
  EXPECT_THROW(encode_global(GlobalForcePrompt::create(0.5, 0), d), InvalidArgument);
}

TEST(BlobDisplacement, ReferenceValues) {
  VideoDims d;
  EXPECT_EQ(blob_displacement(0.0, d), 90.0);
  EXPECT_EQ(blob_displacement(1.0, d), 360.0);
  EXPECT_EQ(blob_displacement(0.5, d), 225.0);
  double prev = -1;
  for (int n = 0; n <= 100; ++n) {
    const double v = blob_displacement(n / 100.0, d);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(EncodeLocal, FinalFrameCenters) {
  VideoDims d;  // 49 x 480 x 720
  auto right = LocalForcePrompt::create(100, 200, 1.0, 0, d);
  EXPECT_EQ(blob_center(right, d, 48), std::make_pair(460.0, 200.0));
  auto up = LocalForcePrompt::create(100, 200, 0.0, 90, d);
  EXPECT_EQ(blob_center(up, d, 48), std::make_pair(100.0, 110.0));

  auto t = encode_local(right, d);
  EXPECT_EQ(frame_argmax(t, 48), std::make_pair(460, 200));
  EXPECT_EQ(frame_argmax(t, 0), std::make_pair(100, 200));
  EXPECT_EQ(t.at(48, 0, 200, 460), 1.0f);
  auto t_up = encode_local(up, d);
  EXPECT_EQ(frame_argmax(t_up, 48), std::make_pair(100, 110));
}

TEST(EncodeLocal, MatchesBruteForceReference) {
  const auto d = small_dims();
  for (auto [x, y, F, th] : {std::tuple{20.0, 30.0, 0.7, 33.0}, std::tuple{120.5, 80.25, 0.0, 200.0},
                             std::tuple{70.0, 10.0, 1.0, 271.0}}) {
    auto t = encode_local(LocalForcePrompt::create(x, y, F, th, d), d);
    for (int f = 0; f < d.frames; ++f)
      for (int r = 0; r < d.height; ++r)
        for (int c = 0; c < d.width; ++c) {
          const double ref = reference_intensity(x, y, F, th, d, f, c, r);
          for (int ch = 0; ch < 3; ++ch) ASSERT_NEAR(t.at(f, ch, r, c), ref, 1e-6) << f << " " << r << " " << c;
        }
  }
}

TEST(EncodeLocal, FirstFrameArgmaxIsRoundedStart) {
  const auto d = small_dims(3, 120, 160);
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(0, d.width - 1), y = rng.uniform(0, d.height - 1);
    // exact .5 ties are ambiguous for argmax; skip them
    if (std::abs(x - std::floor(x) - 0.5) < 1e-3 || std::abs(y - std::floor(y) - 0.5) < 1e-3) continue;
    auto t = encode_local(LocalForcePrompt::create(x, y, rng.uniform01(), rng.uniform(0, 360), d), d);
    EXPECT_EQ(frame_argmax(t, 0), std::make_pair(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))));
  }
}

TEST(EncodeLocal, ValuesInUnitRangeAndChannelsEqual) {
  const auto d = small_dims();
  auto t = encode_local(LocalForcePrompt::create(5, 5, 1.0, 135, d), d);  // exits the frame
  for (float v : t.values()) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
  for (int f = 0; f < d.frames; ++f) {
    EXPECT_TRUE(std::ranges::equal(t.plane(f, 0), t.plane(f, 1)));
    EXPECT_TRUE(std::ranges::equal(t.plane(f, 0), t.plane(f, 2)));
  }
  // last frame blob center is far outside; nothing written
  EXPECT_EQ(frame_sum(t, d.frames - 1), 0.0);
}

TEST(EncodeLocal, MassConservedWhileInside) {
  // width 160, F = 1 -> travel 80 px over 4 steps: integer offsets
  auto d = small_dims(5, 100, 160);
  auto t = encode_local(LocalForcePrompt::create(40, 50, 1.0, 0, d), d);
  const double s0 = frame_sum(t, 0);
  for (int f = 1; f < d.frames; ++f) EXPECT_EQ(frame_sum(t, f), s0);

  // sub-pixel steps: equal up to truncation-boundary sampling
  d = small_dims(49, 200, 720);
  t = encode_local(LocalForcePrompt::create(200, 100, 0.3, 0, d), d);
  const double r0 = frame_sum(t, 0);
  for (int f = 1; f < d.frames; ++f) EXPECT_NEAR(frame_sum(t, f) / r0, 1.0, 1e-3);
}

TEST(EncodeLocal, MonotoneDisplacementExactSpacing) {
  VideoDims d;
  d.height = 64;
  auto start = LocalForcePrompt::create(50, 32, 0.0, 0, d);
  for (double F1 : {0.0, 0.2, 0.6})
    for (double F2 : {0.3, 0.8, 1.0}) {
      if (F2 <= F1) continue;
      auto a = blob_center(LocalForcePrompt::create(50, 32, F1, 0, d), d, 48).first;
      auto b = blob_center(LocalForcePrompt::create(50, 32, F2, 0, d), d, 48).first;
      EXPECT_NEAR(b - a, 720 * 3.0 / 8.0 * (F2 - F1), 1e-9);
    }
  (void)start;
}

TEST(EncodeLocal, CentroidTravelMatchesDisplacement) {
  VideoDims d;
  d.height = 100;
  for (double F : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    auto t = encode_local(LocalForcePrompt::create(100, 50, F, 0, d), d);
    auto [x0, y0] = centroid(t, 0);
    auto [x1, y1] = centroid(t, 48);
    EXPECT_NEAR(std::hypot(x1 - x0, y1 - y0), blob_displacement(F, d), 1e-9 * blob_displacement(F, d));
  }
}

TEST(EncodeLocal, ContinuousInMagnitude) {
  // Lipschitz away from the truncation edge; the 3-sigma cut adds a step of
  // at most exp(-4.5).
  const auto d = small_dims(5, 80, 200);
  const double slope = (3.0 / 8.0) * d.width / (10.0 * std::sqrt(std::exp(1.0)));
  for (double F = 0.0; F < 0.95; F += 0.1) {
    auto a = encode_local(LocalForcePrompt::create(30, 40, F, 10, d), d);
    auto b = encode_local(LocalForcePrompt::create(30, 40, F + 1e-3, 10, d), d);
    EXPECT_LE(max_abs_diff(a, b), slope * 1e-3 + std::exp(-4.5) + 1e-6);
  }
}

TEST(EncodeMulti, SingletonIsBitIdentical) {
  const auto d = small_dims();
  auto p = LocalForcePrompt::create(33.3, 44.4, 0.6, 77, d);
  EXPECT_EQ(encode_multi(MultiForcePrompt::create({p}), d), encode_local(p, d));
}

TEST(EncodeMulti, CoincidentForcesAreIdempotent) {
  const auto d = small_dims();
  auto p = LocalForcePrompt::create(60, 40, 0.1, 300, d);
  EXPECT_EQ(encode_multi(MultiForcePrompt::create({p, p}), d), encode_local(p, d));
}

TEST(EncodeMulti, FarSeparatedBlobsMatchSingles) {
  auto d = small_dims(5, 100, 400);
  auto left = LocalForcePrompt::create(40, 20, 0.0, 270, d);    // moves down, stays left
  auto right = LocalForcePrompt::create(360, 20, 0.0, 270, d);  // moves down, stays right
  auto both = encode_multi(MultiForcePrompt::create({left, right}), d);
  auto a = encode_local(left, d);
  auto b = encode_local(right, d);
  for (int f = 0; f < d.frames; ++f)
    for (int r = 0; r < d.height; ++r)
      for (int c = 0; c < d.width; ++c) {
        const float expected = c < d.width / 2 ? a.at(f, 0, r, c) : b.at(f, 0, r, c);
        ASSERT_EQ(both.at(f, 0, r, c), expected);
      }
}

TEST(BlobParams, Validation) {
  EXPECT_THROW((BlobParams{0, 1, 1}).validate(), InvalidArgument);
  EXPECT_THROW((BlobParams{20, 10, 10}).validate(), InvalidArgument);
  EXPECT_NO_THROW(BlobParams::from_radius(8).validate());
  EXPECT_EQ(BlobParams::from_radius(20), BlobParams{});
}

TEST(Fpct, RoundTripAndHeader) {
  const auto d = small_dims(3, 4, 5);
  auto t = encode_local(LocalForcePrompt::create(2, 2, 0.5, 45, d), d);
  auto bytes = serialize_fpct(t);
  ASSERT_EQ(bytes.size(), 20u + 3 * 3 * 4 * 5 * 4);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FPCT");
  EXPECT_EQ(bytes[4], 3);  // frames, little-endian
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[16], 5);  // width
  EXPECT_EQ(deserialize_fpct(bytes, EncodingKind::local), t);

  bytes.pop_back();
  EXPECT_THROW(deserialize_fpct(bytes, EncodingKind::local), Error);
  bytes[0] = 'X';
  EXPECT_THROW(deserialize_fpct(bytes, EncodingKind::local), Error);
}

TEST(Fpct, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "ff_fpct_test";
  std::filesystem::create_directories(dir);
  const auto d = small_dims(2, 3, 4);
  auto t = encode_global(GlobalForcePrompt::create(0.5, 90), d);
  write_fpct(dir / "c.fpct", t);
  EXPECT_EQ(read_fpct(dir / "c.fpct", EncodingKind::global), t);
  std::filesystem::remove_all(dir);
}

TEST(ControlPng, AffineMapping) {
  const auto d = small_dims(2, 3, 4);
  auto g = control_frame_image(encode_global(GlobalForcePrompt::create(0.0, 90), d), 0);
  EXPECT_EQ(g.pixel(0, 0), (Rgb{0, 128, 255}));
  const auto dl = small_dims(2, 20, 20);
  auto l = control_frame_image(encode_local(LocalForcePrompt::create(10, 10, 0, 0, dl), dl), 0);
  EXPECT_EQ(l.pixel(10, 10), (Rgb{255, 255, 255}));
}
