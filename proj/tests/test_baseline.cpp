#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "neucf/baseline.hpp"
#include "neucf/sim.hpp"

using namespace neucf;

TEST(CubicCoeffs, ClosedForm) {
  for (double T : {0.25, 1.0, 4.0, 7.3, 36.0}) {
    const CubicProfile c = cubic_coeffs(T);
    EXPECT_EQ(c.a0, 0.0);
    EXPECT_EQ(c.a1, 0.0);
    EXPECT_NEAR(c.a2, 3.0 / (T * T), 1e-12);
    EXPECT_NEAR(c.a3, -2.0 / (T * T * T), 1e-12);
  }
}

TEST(CubicCoeffs, BoundaryConditions) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.05, 40.0);
  for (int trial = 0; trial < 200; ++trial) {
    const CubicProfile c = cubic_coeffs(U(rng));
    EXPECT_NEAR(c.s(0.0), 0.0, 1e-12);
    EXPECT_NEAR(c.s(c.T), 1.0, 1e-12);
    EXPECT_NEAR(c.s_dot(0.0), 0.0, 1e-12);
    EXPECT_NEAR(c.s_dot(c.T), 0.0, 1e-12);
  }
}

TEST(CubicCoeffs, MatchesGeneralLinearSolve) {
  const double T = 2.7;
  Eigen::Matrix4d M;
  M << 1, 0, 0, 0, 0, 1, 0, 0, 1, T, T * T, T * T * T, 0, 1, 2 * T, 3 * T * T;
  const Eigen::Vector4d a = M.fullPivLu().solve(Eigen::Vector4d(0, 0, 1, 0));
  const CubicProfile c = cubic_coeffs(T);
  EXPECT_NEAR(c.a0, a(0), 1e-12);
  EXPECT_NEAR(c.a1, a(1), 1e-12);
  EXPECT_NEAR(c.a2, a(2), 1e-12);
  EXPECT_NEAR(c.a3, a(3), 1e-12);
}

TEST(CubicCoeffs, NonpositiveHorizonRejected) {
  EXPECT_THROW(cubic_coeffs(0.0), NonpositiveHorizon);
  EXPECT_THROW(cubic_coeffs(-1.0), NonpositiveHorizon);
}

TEST(SampleTrajectory, EndpointsAndStraightLine) {
  const CubicProfile c = cubic_profile(4.0, Vec2(0, 0), Vec2(27, 35));
  const TrajectorySample a = sample_trajectory(c, 0.0), b = sample_trajectory(c, 4.0);
  EXPECT_LE((a.pos - Vec2(0, 0)).norm(), 1e-12);
  EXPECT_LE((b.pos - Vec2(27, 35)).norm(), 1e-12);
  EXPECT_LE(a.vel.norm(), 1e-12);
  EXPECT_LE(b.vel.norm(), 1e-12);
  for (double t = 0.0; t <= 4.0; t += 0.37) {
    const Vec2 p = sample_trajectory(c, t).pos;
    EXPECT_NEAR(p.x() * 35.0 - p.y() * 27.0, 0.0, 1e-9);
  }
}

TEST(SampleTrajectory, VelocityMatchesFiniteDifference) {
  const CubicProfile c = cubic_profile(3.0, Vec2(2, 40), Vec2(45, 5));
  const double h = 1e-6;
  for (double t = 0.1; t < 2.9; t += 0.3) {
    const Vec2 fd = (sample_trajectory(c, t + h).pos - sample_trajectory(c, t - h).pos) / (2 * h);
    EXPECT_LE((fd - sample_trajectory(c, t).vel).norm(), 1e-6);
    EXPECT_NEAR((c.s_dot(t + h) - c.s_dot(t - h)) / (2 * h), c.s_ddot(t), 1e-6);
  }
}

TEST(SampleTrajectory, OutsideHorizonRejected) {
  const CubicProfile c = cubic_profile(1.0, Vec2(0, 0), Vec2(1, 1));
  EXPECT_THROW(sample_trajectory(c, -0.01), OutOfHorizon);
  EXPECT_THROW(sample_trajectory(c, 1.01), OutOfHorizon);
}

TEST(BaselineParams, Validation) {
  BaselineParams p;
  p.duration_s = 0.0;
  EXPECT_THROW(PolyBaseline{p}, NonpositiveHorizon);
  p = {};
  p.min_refit_s = -1.0;
  EXPECT_THROW(PolyBaseline{p}, InvalidParameter);
}

namespace {

struct Loop {
  PolyBaseline base;
  PlantState s;
  double dt;
  explicit Loop(BaselineParams p) : base(p), dt(p.dt) {}
  void run(double until, const std::vector<BaselineCue>& targets, bool stop = false) {
    while (s.t < until - 1e-9) {
      s = plant_step(s, base.update(s.t, s.p, s.v, targets, stop), dt, 1e9);
    }
  }
};

}  // namespace

TEST(PolyBaseline, TracksTheCubicReference) {
  Loop loop{BaselineParams{}};
  const std::vector<BaselineCue> t{{0, Vec2(27, 35)}};
  loop.run(4.0, t);
  EXPECT_LE((loop.s.p - Vec2(27, 35)).norm(), 1e-9);
  const CubicProfile ref = *loop.base.profile();
  EXPECT_LE((loop.s.p - sample_trajectory(ref, 4.0).pos).norm(), 1e-9);
  EXPECT_EQ(loop.base.refits(), 0);
}

TEST(PolyBaseline, PicksTheNearestTargetAndRefitsOnChange) {
  Loop loop{BaselineParams{}};
  loop.s.p = Vec2(26, 0);
  std::vector<BaselineCue> t{{0, Vec2(10, 30)}, {1, Vec2(30, 20)}};
  loop.run(1.0, t);
  EXPECT_EQ(*loop.base.target_id(), 1);
  t = {{0, Vec2(10, 30)}};
  loop.run(4.0, t);
  EXPECT_EQ(*loop.base.target_id(), 0);
  EXPECT_EQ(loop.base.refits(), 1);
  EXPECT_LE((loop.s.p - Vec2(10, 30)).norm(), 1e-9);
}

TEST(PolyBaseline, KeepsItsTargetWhenAnotherBecomesNearer) {
  Loop loop{BaselineParams{}};
  std::vector<BaselineCue> t{{0, Vec2(30, 30)}};
  loop.run(0.5, t);
  t.push_back({1, loop.s.p + Vec2(0.5, 0.5)});
  loop.run(4.0, t);
  EXPECT_EQ(*loop.base.target_id(), 0);
  EXPECT_EQ(loop.base.refits(), 0);
}

TEST(PolyBaseline, StopCueBrakesPermanently) {
  Loop loop{BaselineParams{}};
  const std::vector<BaselineCue> t{{0, Vec2(40, 40)}};
  loop.run(1.0, t);
  const double speed = loop.s.v.norm();
  ASSERT_GT(speed, 1.0);
  loop.run(1.01, t, true);
  loop.run(3.0, t);
  EXPECT_FALSE(loop.base.profile().has_value());
  EXPECT_LT(loop.s.v.norm(), speed * 1e-3);
  EXPECT_GT((loop.s.p - Vec2(40, 40)).norm(), 5.0);
}

TEST(SampleTrajectory, PeakSpeedAtMidpoint) {
  const CubicProfile c = cubic_profile(4.0, Vec2(0, 0), Vec2(27, 35));
  const double dist = std::hypot(27.0, 35.0);
  EXPECT_NEAR(sample_trajectory(c, 2.0).vel.norm(), 1.5 * dist / 4.0, 1e-9);
  for (double t = 0.0; t <= 4.0; t += 0.01) EXPECT_LE(sample_trajectory(c, t).vel.norm(), 1.5 * dist / 4.0 + 1e-9);
}
