#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "neucf/geometry.hpp"
#include "neucf/vision.hpp"

using namespace neucf;

namespace {

// Textbook sector formula, independent of the library's conversion.
Rgb hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h, 360.0) / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) {
    r = c, g = x;
  } else if (hp < 2) {
    r = x, g = c;
  } else if (hp < 3) {
    g = c, b = x;
  } else if (hp < 4) {
    g = x, b = c;
  } else if (hp < 5) {
    r = x, b = c;
  } else {
    r = c, b = x;
  }
  const double m = v - c;
  auto q = [&](double u) { return static_cast<std::uint8_t>(std::lround((u + m) * 255.0)); };
  return {q(r), q(g), q(b)};
}

}  // namespace

TEST(RgbToHsv, PrimaryColours) {
  const Hsv red = rgb_to_hsv({255, 0, 0});
  EXPECT_NEAR(red.h, 0.0, 1e-12);
  EXPECT_NEAR(red.s, 1.0, 1e-12);
  EXPECT_NEAR(red.v, 1.0, 1e-12);
  EXPECT_NEAR(rgb_to_hsv({0, 255, 0}).h, 120.0, 1e-12);
  EXPECT_NEAR(rgb_to_hsv({0, 0, 255}).h, 240.0, 1e-12);
  const Hsv grey = rgb_to_hsv({128, 128, 128});
  EXPECT_NEAR(grey.s, 0.0, 1e-12);
}

TEST(RgbToHsv, RoundTripThroughIndependentInverse) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> U(0, 255);
  for (int i = 0; i < 5000; ++i) {
    const Rgb px{static_cast<std::uint8_t>(U(rng)), static_cast<std::uint8_t>(U(rng)),
                 static_cast<std::uint8_t>(U(rng))};
    const Hsv h = rgb_to_hsv(px);
    ASSERT_GE(h.h, 0.0);
    ASSERT_LT(h.h, 360.0);
    const Rgb back = hsv_to_rgb(h.h, h.s, h.v);
    ASSERT_EQ(back, px) << int(px.r) << "," << int(px.g) << "," << int(px.b);
  }
}

TEST(RgbToHsv, BallColoursFallInTheirWindows) {
  const SegmentationConfig cfg;
  EXPECT_TRUE(cfg.orange.contains(rgb_to_hsv(kOrangeBall).h));
  EXPECT_TRUE(cfg.green.contains(rgb_to_hsv(kGreenBall).h));
  EXPECT_LT(rgb_to_hsv(kTableTop).s, cfg.min_saturation);
}

TEST(SegmentBeacons, UniformBlackImageHasNoBlobs) {
  const RasterImage img(200, 100, Rgb{0, 0, 0});
  EXPECT_TRUE(segment_beacons(img, {}).empty());
}

TEST(SegmentBeacons, SingleDiscCentroidAndArea) {
  RasterImage img(200, 150, kTableTop);
  fill_disc(img, Vec2(80.0, 60.0), 10.0, kOrangeBall);
  const auto blobs = segment_beacons(img, {});
  ASSERT_EQ(blobs.size(), 1u);
  EXPECT_EQ(blobs[0].color, BeaconColor::Orange);
  EXPECT_LE((blobs[0].centroid - Vec2(80.0, 60.0)).norm(), 0.5);
  EXPECT_NEAR(static_cast<double>(blobs[0].area), std::numbers::pi * 100.0, 0.1 * std::numbers::pi * 100.0);
}

TEST(SegmentBeacons, SmallSpecksAreDropped) {
  RasterImage img(200, 200, kTableTop);
  img.at(10, 10) = kOrangeBall;
  img.at(11, 10) = kOrangeBall;
  fill_disc(img, Vec2(100.0, 100.0), 8.0, kGreenBall);
  const auto blobs = segment_beacons(img, {});
  ASSERT_EQ(blobs.size(), 1u);
  EXPECT_EQ(blobs[0].color, BeaconColor::Green);
  const double min_area = SegmentationConfig{}.min_area_fraction * 200 * 200;
  for (const Blob& b : blobs) {
    EXPECT_GE(static_cast<double>(b.area), min_area);
    EXPECT_GE(b.centroid.x(), 0.0);
    EXPECT_LT(b.centroid.x(), 200.0);
  }
}

TEST(SegmentBeacons, SortedByAreaDescending) {
  RasterImage img(300, 200, kTableTop);
  fill_disc(img, Vec2(50, 50), 6.0, kOrangeBall);
  fill_disc(img, Vec2(150, 100), 12.0, kOrangeBall);
  fill_disc(img, Vec2(250, 150), 9.0, kGreenBall);
  const auto blobs = segment_beacons(img, {});
  ASSERT_EQ(blobs.size(), 3u);
  EXPECT_GE(blobs[0].area, blobs[1].area);
  EXPECT_GE(blobs[1].area, blobs[2].area);
}

TEST(SyntheticCamera, RenderedDiscsRecoveredWithinOnePixel) {
  const SyntheticCamera cam = SyntheticCamera::default_rig();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> X(5.0, 47.0), Y(5.0, 42.0);
  for (int trial = 0; trial < 25; ++trial) {
    const std::vector<SceneBall> balls{{BeaconColor::Orange, Vec2(X(rng), Y(rng))}};
    const RasterImage img = cam.render(balls);
    const auto blobs = segment_beacons(img, {});
    ASSERT_EQ(blobs.size(), 1u);
    const Vec2 expect = cam.world_to_camera(balls[0].pos_cm);
    EXPECT_LE((blobs[0].centroid - expect).norm(), 1.0);
  }
}

TEST(SyntheticCamera, WorldPositionsSurviveTheFullPipeline) {
  const SyntheticCamera cam = SyntheticCamera::default_rig();
  const std::vector<SceneBall> balls{{BeaconColor::Orange, Vec2(27, 35)}, {BeaconColor::Green, Vec2(45, 8)}};
  const auto blobs = segment_beacons(cam.render(balls), {});
  ASSERT_EQ(blobs.size(), 2u);
  for (const Blob& b : blobs) {
    const Vec2 w = pixel_to_world(cam.calibration().workspace, apply_affine(cam.calibration().affine, b.centroid));
    const Vec2 truth = b.color == BeaconColor::Orange ? Vec2(27, 35) : Vec2(45, 8);
    EXPECT_LE((w - truth).norm(), 0.2);
  }
}

TEST(SyntheticCamera, CornerCorrespondencesFitToMachinePrecision) {
  const SyntheticCamera cam = SyntheticCamera::default_rig();
  const WorkspaceCalib& ws = cam.calibration().workspace;
  for (const Vec2& w : {Vec2(0, 0), Vec2(52, 0), Vec2(0, 47), Vec2(52, 47)}) {
    EXPECT_LE((cam.camera_to_world(cam.world_to_camera(w)) - w).norm(), 1e-9);
  }
  const Vec2 o = apply_affine(cam.calibration().affine, cam.world_to_camera(Vec2(52, 47)));
  EXPECT_NEAR(o.x(), ws.x_max, 1e-9);
  EXPECT_NEAR(o.y(), ws.y_max, 1e-9);
}

TEST(Ppm, RoundTrip) {
  RasterImage img(7, 5, kTableTop);
  img.at(3, 2) = kOrangeBall;
  img.at(6, 4) = kGreenBall;
  std::stringstream ss;
  write_ppm(ss, img);
  const RasterImage back = read_ppm(ss);
  ASSERT_EQ(back.width(), 7);
  ASSERT_EQ(back.height(), 5);
  EXPECT_TRUE(std::equal(img.pixels().begin(), img.pixels().end(), back.pixels().begin()));
}

TEST(Ppm, HeaderCommentsAccepted) {
  std::stringstream ss;
  ss << "P6\n# made by hand\n2 1\n255\n";
  ss.write("\x01\x02\x03\x04\x05\x06", 6);
  const RasterImage img = read_ppm(ss);
  EXPECT_EQ(img.at(1, 0), (Rgb{4, 5, 6}));
}

TEST(Ppm, MalformedInputsRejected) {
  std::stringstream wrong_magic("P3\n1 1\n255\n0 0 0\n");
  EXPECT_THROW(read_ppm(wrong_magic), ImageFormatError);
  std::stringstream truncated;
  truncated << "P6\n4 4\n255\n";
  truncated.write("\x00\x01", 2);
  EXPECT_THROW(read_ppm(truncated), ImageFormatError);
  EXPECT_THROW(read_ppm(std::filesystem::path("/nonexistent/x.ppm")), ImageFormatError);
}
