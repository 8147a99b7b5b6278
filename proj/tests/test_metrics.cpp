#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>

#include "neucf/baseline.hpp"
#include "neucf/metrics.hpp"

using namespace neucf;

namespace {

std::vector<Vec2> segment(const Vec2& a, const Vec2& b, int n) {
  std::vector<Vec2> out;
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * (static_cast<double>(i) / (n - 1)));
  return out;
}

std::vector<Vec2> transform(const std::vector<Vec2>& pts, double angle, double scale, const Vec2& shift) {
  const double c = std::cos(angle), s = std::sin(angle);
  std::vector<Vec2> out;
  for (const Vec2& p : pts) out.emplace_back(scale * (c * p.x() - s * p.y()) + shift.x(), scale * (s * p.x() + c * p.y()) + shift.y());
  return out;
}

// Ordinary least squares with intercept via a QR solve, r^2 = 1 - SS_res / SS_tot.
double ols_r2(const std::vector<Vec2>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = pts[i].x();
    y(i) = pts[i].y();
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  const double ss_res = (y - X * beta).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  return 1.0 - ss_res / ss_tot;
}

std::vector<Vec2> quarter_arc(int n) {
  std::vector<Vec2> out;
  for (int i = 0; i < n; ++i) {
    const double a = 0.5 * std::numbers::pi * i / (n - 1);
    out.emplace_back(20.0 * std::cos(a), 20.0 * std::sin(a));
  }
  return out;
}

}  // namespace

TEST(PathLength, ThreeFourFive) {
  const std::vector<Vec2> p{Vec2(0, 0), Vec2(3, 4)};
  EXPECT_EQ(path_length(p), 5.0);
  const std::vector<Vec2> q{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1)};
  EXPECT_EQ(path_length(q), 2.0);
}

TEST(PathLength, SampledLineIndependentOfSampling) {
  for (int n : {2, 7, 100, 1001}) {
    EXPECT_NEAR(path_length(segment(Vec2(0, 0), Vec2(27, 35), n)), std::hypot(27.0, 35.0), 1e-12);
  }
}

TEST(PathLength, RigidMotionInvariant) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  std::vector<Vec2> walk{Vec2::Zero()};
  for (int i = 0; i < 200; ++i) walk.push_back(walk.back() + Vec2(n01(rng), n01(rng)));
  const double base = path_length(walk);
  EXPECT_GE(base, (walk.back() - walk.front()).norm());
  for (double a : {0.3, 1.7, -2.2}) EXPECT_NEAR(path_length(transform(walk, a, 1.0, Vec2(11, -4))), base, 1e-9);
}

TEST(PathLength, TooFewSamples) {
  const std::vector<Vec2> one{Vec2(1, 1)};
  EXPECT_THROW(path_length(one), TooFewSamples);
}

TEST(StraightnessR2, LinesScoreOne) {
  EXPECT_NEAR(straightness_r2(segment(Vec2(0, 0), Vec2(27, 35), 50)), 1.0, 1e-12);
  EXPECT_NEAR(straightness_r2(segment(Vec2(5, 0), Vec2(5, 40), 50)), 1.0, 1e-12);
  EXPECT_NEAR(straightness_r2(segment(Vec2(0, 3), Vec2(40, 3), 50)), 1.0, 1e-12);
}

TEST(StraightnessR2, MatchesIndependentOlsOnRotatedData) {
  const std::vector<Vec2> arc = quarter_arc(100);
  const std::vector<Vec2> rotated = rotate_to_diagonal(arc);
  const double r2 = straightness_r2(arc);
  EXPECT_NEAR(r2, ols_r2(rotated), 1e-9);
  EXPECT_GT(r2, 0.0);
  EXPECT_LT(r2, 1.0);
}

TEST(StraightnessR2, RotationAndScaleInvariant) {
  const std::vector<Vec2> arc = quarter_arc(80);
  const double base = straightness_r2(arc);
  for (double a : {0.1, 0.9, 2.5, -1.3}) {
    for (double s : {0.01, 3.0, 250.0}) EXPECT_NEAR(straightness_r2(transform(arc, a, s, Vec2(2, 9))), base, 1e-9);
  }
}

TEST(StraightnessR2, BoundedOnRandomClouds) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 30; ++i) pts.emplace_back(n01(rng), 0.3 * n01(rng));
    const double r2 = straightness_r2(pts);
    ASSERT_GE(r2, 0.0);
    ASSERT_LE(r2, 1.0);
  }
}

TEST(StraightnessR2, Errors) {
  const std::vector<Vec2> same(5, Vec2(2, 2));
  EXPECT_THROW(straightness_r2(same), DegeneratePath);
  const std::vector<Vec2> two{Vec2(0, 0), Vec2(1, 1)};
  EXPECT_THROW(straightness_r2(two), TooFewSamples);
}

TEST(DerivativeStats, ConstantVelocityHasNoAcceleration) {
  const DerivativeStats d = derivative_stats(segment(Vec2(0, 0), Vec2(3, 2), 40), 0.01);
  EXPECT_NEAR(d.accel_mean, 0.0, 1e-6);
  EXPECT_NEAR(d.accel_std, 0.0, 1e-6);
  EXPECT_NEAR(d.jerk_mean, 0.0, 1e-3);
}

TEST(DerivativeStats, QuadraticHasConstantAcceleration) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 30; ++i) {
    const double t = 0.1 * i;
    pts.emplace_back(t * t, t * t);
  }
  const DerivativeStats d = derivative_stats(pts, 0.1);
  EXPECT_NEAR(d.accel_mean, 2.0, 1e-9);
  EXPECT_NEAR(d.accel_std, 0.0, 1e-9);
  EXPECT_NEAR(d.jerk_mean, 0.0, 1e-6);
  EXPECT_NEAR(d.jerk_std, 0.0, 1e-6);
}

TEST(DerivativeStats, CubicProfileMatchesAnalyticDerivatives) {
  const double T = 4.0, dt = 0.01;
  const CubicProfile c = cubic_profile(T, Vec2(1, 2), Vec2(28, 37));
  const Vec2 d = c.goal - c.start;
  std::vector<Vec2> pts;
  const int n = static_cast<int>(std::lround(T / dt)) + 1;
  for (int i = 0; i < n; ++i) pts.push_back(sample_trajectory(c, std::min(T, i * dt)).pos);
  const DerivativeStats s = derivative_stats(pts, dt);

  std::vector<double> acc;
  for (int i = 1; i + 1 < n; ++i) {
    acc.push_back(c.s_ddot(i * dt) * d.x());
    acc.push_back(c.s_ddot(i * dt) * d.y());
  }
  const MeanStd a = mean_std(acc);
  EXPECT_NEAR(s.accel_mean, a.mean, 1e-6 * std::max(1.0, std::abs(a.mean)));
  EXPECT_NEAR(s.accel_std, a.std, 1e-6 * a.std);
  const double jx = c.s_dddot() * d.x(), jy = c.s_dddot() * d.y();
  EXPECT_NEAR(s.jerk_mean, 0.5 * (jx + jy), 1e-6 * std::abs(jx + jy));
  EXPECT_NEAR(s.jerk_std, 0.5 * std::abs(jx - jy), 1e-6 * std::abs(jx - jy));
}

TEST(DerivativeStats, NonuniformTimesRejected) {
  const std::vector<double> t{0.0, 0.1, 0.2, 0.35, 0.4};
  const std::vector<Vec2> p(5, Vec2(0, 0));
  EXPECT_THROW(derivative_stats(t, p), NonuniformSampling);
  const std::vector<double> u{0.0, 0.1, 0.2, 0.3, 0.4};
  EXPECT_NO_THROW(derivative_stats(u, p));
  EXPECT_THROW(derivative_stats(std::vector<Vec2>(3, Vec2(0, 0)), 0.1), TooFewSamples);
}

TEST(SecondDerivativeVariance, ZeroOnUniformLinesAndTranslationInvariant) {
  EXPECT_NEAR(second_derivative_variance(segment(Vec2(0, 0), Vec2(27, 35), 300)), 0.0, 1e-20);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  std::vector<Vec2> walk{Vec2::Zero()};
  for (int i = 0; i < 100; ++i) walk.push_back(walk.back() + Vec2(n01(rng), n01(rng)));
  const double base = second_derivative_variance(walk);
  EXPECT_GT(base, 0.0);
  EXPECT_NEAR(second_derivative_variance(transform(walk, 0.0, 1.0, Vec2(30, -12))), base, 1e-9 * base);
}

TEST(SecondDerivativeVariance, HandComputed) {
  // Second differences: x {1, -1}, y {0, 0} -> pooled {1, 0, -1, 0}, variance 0.5.
  const std::vector<Vec2> p{Vec2(0, 0), Vec2(0, 0), Vec2(1, 0), Vec2(1, 0)};
  EXPECT_DOUBLE_EQ(second_derivative_variance(p), 0.5);
}

TEST(FractalSlope, DenseLineHasDimensionOne) {
  const double slope = fractal_slope(segment(Vec2(0, 0), Vec2(27, 35), 5000), 50);
  EXPECT_GE(slope, -1.1);
  EXPECT_LE(slope, -0.95);
}

TEST(FractalSlope, LineOrientationIndependent) {
  const double base = fractal_slope(segment(Vec2(0, 0), Vec2(40, 0), 2000), 50);
  for (double deg = 5.0; deg < 360.0; deg += 23.0) {
    const double a = deg * std::numbers::pi / 180.0;
    const double s = fractal_slope(segment(Vec2(0, 0), Vec2(40 * std::cos(a), 40 * std::sin(a)), 2000), 50);
    EXPECT_NEAR(s, base, 0.05) << deg;
  }
}

TEST(FractalSlope, FilledZigzagHasDimensionTwo) {
  std::vector<Vec2> zig;
  const int passes = 700;
  for (int i = 0; i <= passes; ++i) {
    const double x = static_cast<double>(i) / passes;
    zig.emplace_back(x, i % 2 == 0 ? 0.0 : 1.0);
  }
  const double slope = fractal_slope(zig, 50);
  EXPECT_GE(slope, -2.1);
  EXPECT_LE(slope, -1.85);
}

TEST(FractalSlope, DegeneratePathsRejected) {
  const std::vector<Vec2> same{Vec2(3, 3), Vec2(3, 3)};
  EXPECT_THROW(fractal_slope(same, 50), DegeneratePath);
  const std::vector<Vec2> one{Vec2(3, 3)};
  EXPECT_THROW(fractal_slope(one, 50), DegeneratePath);
}

TEST(PositionalError, AbsoluteErrorsAggregated) {
  const std::vector<Vec2> exact{Vec2(27, 35)};
  const PositionalError z = positional_error(exact, Vec2(27, 35));
  EXPECT_EQ(z.x.mean, 0.0);
  EXPECT_EQ(z.y.std, 0.0);
  const std::vector<Vec2> pm{Vec2(1, 0), Vec2(-1, 0)};
  const PositionalError e = positional_error(pm, Vec2(0, 0));
  EXPECT_EQ(e.x.mean, 1.0);
  EXPECT_EQ(e.x.std, 0.0);
  const std::vector<Vec2> three{Vec2(0.30, 0), Vec2(0.32, 0), Vec2(-0.34, 0)};
  const PositionalError t = positional_error(three, Vec2(0, 0));
  EXPECT_NEAR(t.x.mean, 0.32, 1e-12);
  EXPECT_NEAR(t.x.std, std::sqrt(0.0008 / 3.0), 1e-12);
  EXPECT_NEAR(t.x.std, 0.0163, 5e-5);
}

TEST(ComputeMetrics, StraightReachBundle) {
  const std::vector<Vec2> line = segment(Vec2(0, 0), Vec2(27, 35), 400);
  const MetricsBundle m = compute_metrics(line, 0.01, Vec2(27, 35));
  ASSERT_TRUE(m.err_x && m.err_y && m.path_length && m.r2 && m.d2_variance && m.fractal_slope && m.jerk_mean);
  EXPECT_NEAR(m.err_x->mean, 0.0, 1e-12);
  EXPECT_NEAR(*m.r2, 1.0, 1e-12);
  const nlohmann::json j = m;
  for (const char* key : {"err_x", "err_y", "path_length", "r2", "accel_mean", "accel_std", "jerk_mean", "jerk_std",
                          "d2_variance", "fractal_slope"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.size(), 10u);
}

TEST(ComputeMetrics, DegenerateMetricsLeftEmpty) {
  const std::vector<Vec2> still(10, Vec2(4, 4));
  const MetricsBundle m = compute_metrics(still, 0.01, std::nullopt);
  EXPECT_FALSE(m.err_x.has_value());
  EXPECT_EQ(*m.path_length, 0.0);
  EXPECT_FALSE(m.r2.has_value());
  EXPECT_FALSE(m.fractal_slope.has_value());
  EXPECT_TRUE(nlohmann::json(m)["r2"].is_null());
}

TEST(AggregateMetrics, MeansAndErrorSpread) {
  MetricsBundle a, b;
  a.err_x = MeanStd{0.2, 0.0};
  b.err_x = MeanStd{0.4, 0.0};
  a.path_length = 10.0;
  b.path_length = 12.0;
  a.r2 = 0.99;
  const std::vector<MetricsBundle> runs{a, b};
  const MetricsBundle m = aggregate_metrics(runs);
  EXPECT_NEAR(m.err_x->mean, 0.3, 1e-12);
  EXPECT_NEAR(m.err_x->std, 0.1, 1e-12);
  EXPECT_EQ(*m.path_length, 11.0);
  EXPECT_FALSE(m.r2.has_value());
  EXPECT_FALSE(m.err_y.has_value());
}
