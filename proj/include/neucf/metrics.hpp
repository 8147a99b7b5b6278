#pragma once

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "neucf/types.hpp"

namespace neucf {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(std::span<const double> xs);

/// Throws TooFewSamples below two samples.
double path_length(std::span<const Vec2> pts);

/// Rotates the samples about their centroid so the major principal axis lies
/// along the diagonal y = x.
std::vector<Vec2> rotate_to_diagonal(std::span<const Vec2> pts);

/// r^2 of the ordinary least-squares fit of y on x after rotate_to_diagonal.
/// Invariant under rotation and uniform scaling. Throws TooFewSamples below
/// three samples and DegeneratePath when every point coincides.
double straightness_r2(std::span<const Vec2> pts);

struct DerivativeStats {
  double accel_mean = 0.0, accel_std = 0.0;
  double jerk_mean = 0.0, jerk_std = 0.0;
};

/// Central differences of position: second order at interior samples, third
/// order on the half-step stencil. Both axes pooled. Throws TooFewSamples below
/// four samples.
DerivativeStats derivative_stats(std::span<const Vec2> pts, double dt);

/// Same, checking that `t` is uniformly spaced. Throws NonuniformSampling.
DerivativeStats derivative_stats(std::span<const double> t, std::span<const Vec2> pts);

/// Population variance of the pooled per-axis second differences, in
/// sample-index units. Throws TooFewSamples below four samples.
double second_derivative_variance(std::span<const Vec2> pts);

/// Box-counting slope of log N(s) against log s over `n_scales` geometric box
/// sizes from L/4 down to L/256, L being the side of the square bounding box.
/// Throws DegeneratePath when the path has no extent.
double fractal_slope(std::span<const Vec2> pts, int n_scales = 50);

struct PositionalError {
  MeanStd x;
  MeanStd y;
};

/// Per-axis absolute errors over repeats.
PositionalError positional_error(std::span<const Vec2> finals, const Vec2& target);

struct MetricsBundle {
  std::optional<MeanStd> err_x;
  std::optional<MeanStd> err_y;
  std::optional<double> path_length;
  std::optional<double> r2;
  std::optional<double> accel_mean, accel_std;
  std::optional<double> jerk_mean, jerk_std;
  std::optional<double> d2_variance;
  std::optional<double> fractal_slope;
};

/// Computes every trajectory metric that is defined for the given path;
/// degenerate ones stay empty. `target` enables the error rows.
MetricsBundle compute_metrics(std::span<const Vec2> pts, double dt, const std::optional<Vec2>& target);

/// Mean of each metric across repeats. Error rows become mean and population
/// std of the per-run absolute errors.
MetricsBundle aggregate_metrics(std::span<const MetricsBundle> runs);

void to_json(nlohmann::json& j, const MeanStd& m);
void to_json(nlohmann::json& j, const MetricsBundle& m);

}  // namespace neucf
