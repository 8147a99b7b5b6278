#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <random>

#include "neucf/geometry.hpp"

using namespace neucf;

namespace {

// Independent oracle: the full 6x6 system in the six unknowns (a00 a01 b00 a10 a11 b10).
Eigen::Matrix<double, 6, 1> solve_6x6(const std::array<Vec2, 3>& src, const std::array<Vec2, 3>& dst) {
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> b;
  for (int i = 0; i < 3; ++i) {
    A.row(2 * i) << src[i].x(), src[i].y(), 1.0, 0.0, 0.0, 0.0;
    A.row(2 * i + 1) << 0.0, 0.0, 0.0, src[i].x(), src[i].y(), 1.0;
    b(2 * i) = dst[i].x();
    b(2 * i + 1) = dst[i].y();
  }
  return A.colPivHouseholderQr().solve(b);
}

}  // namespace

TEST(EstimateAffine, IdentityCase) {
  const std::array<Vec2, 3> pts{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const AffineMap m = estimate_affine(pts, pts);
  EXPECT_NEAR(m.a00, 1.0, 1e-12);
  EXPECT_NEAR(m.a01, 0.0, 1e-12);
  EXPECT_NEAR(m.a10, 0.0, 1e-12);
  EXPECT_NEAR(m.a11, 1.0, 1e-12);
  EXPECT_NEAR(m.b00, 0.0, 1e-12);
  EXPECT_NEAR(m.b10, 0.0, 1e-12);
}

TEST(EstimateAffine, PureTranslation) {
  const std::array<Vec2, 3> src{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const std::array<Vec2, 3> dst{Vec2(5, 7), Vec2(6, 7), Vec2(5, 8)};
  const AffineMap m = estimate_affine(src, dst);
  EXPECT_NEAR(m.a00, 1.0, 1e-12);
  EXPECT_NEAR(m.a11, 1.0, 1e-12);
  EXPECT_NEAR(m.b00, 5.0, 1e-12);
  EXPECT_NEAR(m.b10, 7.0, 1e-12);
  EXPECT_TRUE(apply_affine(m, Vec2(0, 0)).isApprox(Vec2(5, 7)));
}

TEST(EstimateAffine, HalfScaleMatchesGeneralSolver) {
  const std::array<Vec2, 3> src{Vec2(0, 0), Vec2(2, 0), Vec2(0, 2)};
  const std::array<Vec2, 3> dst{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const AffineMap m = estimate_affine(src, dst);
  const auto x = solve_6x6(src, dst);
  EXPECT_NEAR(m.a00, x(0), 1e-12);
  EXPECT_NEAR(m.a01, x(1), 1e-12);
  EXPECT_NEAR(m.b00, x(2), 1e-12);
  EXPECT_NEAR(m.a10, x(3), 1e-12);
  EXPECT_NEAR(m.a11, x(4), 1e-12);
  EXPECT_NEAR(m.b10, x(5), 1e-12);
  EXPECT_NEAR(m.a00, 0.5, 1e-12);
  const Vec2 q = apply_affine(m, Vec2(2, 0));
  EXPECT_NEAR(q.x(), 1.0, 1e-12);
  EXPECT_NEAR(q.y(), 0.0, 1e-12);
}

TEST(EstimateAffine, RandomTrianglesReproduceCorrespondences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-500.0, 500.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::array<Vec2, 3> src, dst;
    for (int i = 0; i < 3; ++i) {
      src[i] = Vec2(U(rng), U(rng));
      dst[i] = Vec2(U(rng), U(rng));
    }
    const double area = std::abs((src[1] - src[0]).x() * (src[2] - src[0]).y() -
                                 (src[1] - src[0]).y() * (src[2] - src[0]).x());
    if (area < 1.0) continue;
    const AffineMap m = estimate_affine(src, dst);
    const auto x = solve_6x6(src, dst);
    for (int i = 0; i < 3; ++i) EXPECT_LE((apply_affine(m, src[i]) - dst[i]).norm(), 1e-9);
    EXPECT_NEAR(m.a00, x(0), 1e-9 * std::max(1.0, std::abs(x(0))));
    EXPECT_NEAR(m.b10, x(5), 1e-9 * std::max(1.0, std::abs(x(5))));
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(EstimateAffine, CollinearSourceThrows) {
  const std::array<Vec2, 3> src{Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)};
  const std::array<Vec2, 3> dst{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  EXPECT_THROW(estimate_affine(src, dst), CollinearPoints);
}

TEST(ApplyAffine, IdentityLeavesPointsAlone) {
  EXPECT_TRUE(apply_affine(AffineMap::identity(), Vec2(3, 4)).isApprox(Vec2(3, 4)));
}

TEST(ApplyAffine, InverseRoundTrip) {
  const std::array<Vec2, 3> src{Vec2(10, 20), Vec2(300, 40), Vec2(30, 250)};
  const std::array<Vec2, 3> dst{Vec2(0, 0), Vec2(520, 0), Vec2(0, 470)};
  const AffineMap m = estimate_affine(src, dst);
  const AffineMap inv = invert_affine(m);
  for (const Vec2& p : {Vec2(0, 0), Vec2(123.5, 77.25), Vec2(-40, 900)}) {
    EXPECT_LE((apply_affine(inv, apply_affine(m, p)) - p).norm(), 1e-9);
  }
}

TEST(PixelToWorld, CornersMapExactly) {
  const WorkspaceCalib c;
  const Vec2 lo = pixel_to_world(c, Vec2(0, 0));
  const Vec2 hi = pixel_to_world(c, Vec2(c.x_max, c.y_max));
  EXPECT_EQ(lo.x(), 0.0);
  EXPECT_EQ(lo.y(), 0.0);
  EXPECT_EQ(hi.x(), 52.0);
  EXPECT_EQ(hi.y(), 47.0);
}

TEST(PixelToWorld, CentreAndRoundTrip) {
  const WorkspaceCalib c;
  const Vec2 mid = pixel_to_world(c, Vec2(260, 235));
  EXPECT_DOUBLE_EQ(mid.x(), 26.0);
  EXPECT_DOUBLE_EQ(mid.y(), 23.5);
  for (const Vec2& w : {Vec2(27, 35), Vec2(46, 30), Vec2(0.1, 46.9)}) {
    EXPECT_LE((pixel_to_world(c, world_to_pixel(c, w)) - w).norm(), 1e-12);
  }
}

TEST(PixelToWorld, OutsideFrameThrows) {
  const WorkspaceCalib c;
  EXPECT_THROW(pixel_to_world(c, Vec2(-5, 10)), OutOfFrame);
  EXPECT_THROW(pixel_to_world(c, Vec2(10, c.y_max + 5)), OutOfFrame);
}

TEST(WorkspaceCalib, NonPositiveExtentRejected) {
  WorkspaceCalib c;
  c.width_cm = 0.0;
  EXPECT_THROW(c.validate(), InvalidParameter);
}

TEST(CameraCalibration, JsonRoundTrip) {
  CameraCalibration c;
  c.affine = estimate_affine({Vec2(1, 2), Vec2(300, 5), Vec2(7, 260)}, {Vec2(0, 0), Vec2(520, 0), Vec2(0, 470)});
  const nlohmann::json j = c;
  const CameraCalibration back = j.get<CameraCalibration>();
  EXPECT_EQ(back.affine.a00, c.affine.a00);
  EXPECT_EQ(back.affine.b10, c.affine.b10);
  EXPECT_EQ(back.workspace.x_max, c.workspace.x_max);
}
