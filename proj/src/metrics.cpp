#include "neucf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace neucf {

MeanStd mean_std(std::span<const double> xs) {
  if (xs.empty()) throw TooFewSamples("mean of an empty set");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

double path_length(std::span<const Vec2> pts) {
  if (pts.size() < 2) throw TooFewSamples("path length needs at least two samples");
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

namespace {

struct Moments {
  Vec2 mean;
  Eigen::Matrix2d cov;
};

Moments moments(std::span<const Vec2> pts) {
  Moments m{Vec2::Zero(), Eigen::Matrix2d::Zero()};
  for (const Vec2& p : pts) m.mean += p;
  m.mean /= static_cast<double>(pts.size());
  for (const Vec2& p : pts) {
    const Vec2 d = p - m.mean;
    m.cov += d * d.transpose();
  }
  m.cov /= static_cast<double>(pts.size());
  return m;
}

}  // namespace

std::vector<Vec2> rotate_to_diagonal(std::span<const Vec2> pts) {
  const Moments m = moments(pts);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m.cov);
  const Vec2 major = es.eigenvectors().col(1);
  const double rot = std::atan2(1.0, 1.0) - std::atan2(major.y(), major.x());
  const double c = std::cos(rot), s = std::sin(rot);
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const Vec2& p : pts) {
    const Vec2 d = p - m.mean;
    out.emplace_back(c * d.x() - s * d.y(), s * d.x() + c * d.y());
  }
  return out;
}

double straightness_r2(std::span<const Vec2> pts) {
  if (pts.size() < 3) throw TooFewSamples("r2 needs at least three samples");
  const Moments m = moments(pts);
  if (m.cov.trace() <= 0.0) throw DegeneratePath("all samples coincide");

  const std::vector<Vec2> q = rotate_to_diagonal(pts);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const Vec2& p : q) {
    sxx += p.x() * p.x();
    syy += p.y() * p.y();
    sxy += p.x() * p.y();
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
}

DerivativeStats derivative_stats(std::span<const Vec2> pts, double dt) {
  if (pts.size() < 4) throw TooFewSamples("derivative statistics need at least four samples");
  if (!(dt > 0.0)) throw NonuniformSampling("sample spacing must be positive");
  const std::size_t n = pts.size();
  std::vector<double> acc, jerk;
  acc.reserve(2 * n);
  jerk.reserve(2 * n);
  const double dt2 = dt * dt, dt3 = dt2 * dt;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Vec2 a = (pts[i + 1] - 2.0 * pts[i] + pts[i - 1]) / dt2;
    acc.push_back(a.x());
    acc.push_back(a.y());
  }
  for (std::size_t i = 1; i + 2 < n; ++i) {
    const Vec2 j = (pts[i + 2] - 3.0 * pts[i + 1] + 3.0 * pts[i] - pts[i - 1]) / dt3;
    jerk.push_back(j.x());
    jerk.push_back(j.y());
  }
  const MeanStd a = mean_std(acc), j = mean_std(jerk);
  return {a.mean, a.std, j.mean, j.std};
}

DerivativeStats derivative_stats(std::span<const double> t, std::span<const Vec2> pts) {
  if (t.size() != pts.size()) throw NonuniformSampling("time and position counts differ");
  if (t.size() < 4) throw TooFewSamples("derivative statistics need at least four samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * dt) {
      throw NonuniformSampling("sample " + std::to_string(i) + " breaks the uniform spacing");
    }
  }
  return derivative_stats(pts, dt);
}

double second_derivative_variance(std::span<const Vec2> pts) {
  if (pts.size() < 4) throw TooFewSamples("second-derivative variance needs at least four samples");
  std::vector<double> d2;
  d2.reserve(2 * pts.size());
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec2 d = pts[i + 1] - 2.0 * pts[i] + pts[i - 1];
    d2.push_back(d.x());
    d2.push_back(d.y());
  }
  const MeanStd m = mean_std(d2);
  return m.std * m.std;
}

double fractal_slope(std::span<const Vec2> pts, int n_scales) {
  if (pts.size() < 2) throw DegeneratePath("box counting needs at least two samples");
  if (n_scales < 2) throw InvalidParameter("box counting needs at least two scales");
  Vec2 lo = pts[0], hi = pts[0];
  for (const Vec2& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double L = (hi - lo).maxCoeff();
  if (!(L > 0.0)) throw DegeneratePath("path has no spatial extent");

  std::vector<double> xs, ys;
  std::unordered_set<std::uint64_t> boxes;
  for (int k = 0; k < n_scales; ++k) {
    const double s = (L / 4.0) * std::pow(1.0 / 64.0, static_cast<double>(k) / (n_scales - 1));
    const double step = s / 2.0;
    boxes.clear();
    auto mark = [&](const Vec2& p) {
      const auto ix = static_cast<std::uint64_t>(std::min(std::floor((p.x() - lo.x()) / s), 1e6));
      const auto iy = static_cast<std::uint64_t>(std::min(std::floor((p.y() - lo.y()) / s), 1e6));
      boxes.insert((ix << 32) | iy);
    };
    mark(pts[0]);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const Vec2 a = pts[i - 1], b = pts[i];
      const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
      for (int q = 1; q <= m; ++q) mark(a + (b - a) * (static_cast<double>(q) / m));
    }
    xs.push_back(std::log(s));
    ys.push_back(std::log(static_cast<double>(boxes.size())));
  }

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

PositionalError positional_error(std::span<const Vec2> finals, const Vec2& target) {
  if (finals.empty()) throw TooFewSamples("positional error needs at least one repeat");
  std::vector<double> ex, ey;
  for (const Vec2& f : finals) {
    ex.push_back(std::abs(f.x() - target.x()));
    ey.push_back(std::abs(f.y() - target.y()));
  }
  return {mean_std(ex), mean_std(ey)};
}

MetricsBundle compute_metrics(std::span<const Vec2> pts, double dt, const std::optional<Vec2>& target) {
  MetricsBundle m;
  if (target && !pts.empty()) {
    const PositionalError e = positional_error(pts.last(1), *target);
    m.err_x = e.x;
    m.err_y = e.y;
  }
  auto attempt = [](auto&& fn) {
    try {
      fn();
    } catch (const TooFewSamples&) {
    } catch (const DegeneratePath&) {
    }
  };
  attempt([&] { m.path_length = path_length(pts); });
  attempt([&] { m.r2 = straightness_r2(pts); });
  attempt([&] {
    const DerivativeStats d = derivative_stats(pts, dt);
    m.accel_mean = d.accel_mean;
    m.accel_std = d.accel_std;
    m.jerk_mean = d.jerk_mean;
    m.jerk_std = d.jerk_std;
  });
  attempt([&] { m.d2_variance = second_derivative_variance(pts); });
  attempt([&] { m.fractal_slope = fractal_slope(pts); });
  return m;
}

MetricsBundle aggregate_metrics(std::span<const MetricsBundle> runs) {
  MetricsBundle out;
  auto errors = [&](std::optional<MeanStd> MetricsBundle::*field) -> std::optional<MeanStd> {
    std::vector<double> xs;
    for (const MetricsBundle& r : runs) {
      if (!(r.*field)) return std::nullopt;
      xs.push_back((r.*field)->mean);
    }
    if (xs.empty()) return std::nullopt;
    return mean_std(xs);
  };
  out.err_x = errors(&MetricsBundle::err_x);
  out.err_y = errors(&MetricsBundle::err_y);
  auto avg = [&](std::optional<double> MetricsBundle::*field) -> std::optional<double> {
    std::vector<double> xs;
    for (const MetricsBundle& r : runs) {
      if (!(r.*field)) return std::nullopt;
      xs.push_back(*(r.*field));
    }
    if (xs.empty()) return std::nullopt;
    return mean_std(xs).mean;
  };
  out.path_length = avg(&MetricsBundle::path_length);
  out.r2 = avg(&MetricsBundle::r2);
  out.accel_mean = avg(&MetricsBundle::accel_mean);
  out.accel_std = avg(&MetricsBundle::accel_std);
  out.jerk_mean = avg(&MetricsBundle::jerk_mean);
  out.jerk_std = avg(&MetricsBundle::jerk_std);
  out.d2_variance = avg(&MetricsBundle::d2_variance);
  out.fractal_slope = avg(&MetricsBundle::fractal_slope);
  return out;
}

void to_json(nlohmann::json& j, const MeanStd& m) { j = nlohmann::json{{"mean", m.mean}, {"std", m.std}}; }

void to_json(nlohmann::json& j, const MetricsBundle& m) {
  auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j = nlohmann::json{{"err_x", opt(m.err_x)},
                     {"err_y", opt(m.err_y)},
                     {"path_length", opt(m.path_length)},
                     {"r2", opt(m.r2)},
                     {"accel_mean", opt(m.accel_mean)},
                     {"accel_std", opt(m.accel_std)},
                     {"jerk_mean", opt(m.jerk_mean)},
                     {"jerk_std", opt(m.jerk_std)},
                     {"d2_variance", opt(m.d2_variance)},
                     {"fractal_slope", opt(m.fractal_slope)}};
}

}  // namespace neucf
