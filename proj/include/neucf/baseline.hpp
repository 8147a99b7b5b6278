#pragma once

#include <optional>
#include <span>

#include "neucf/types.hpp"

namespace neucf {

/// Time scaling s(t) = a0 + a1 t + a2 t^2 + a3 t^3 with s(0)=0, s(T)=1 and zero end velocities.
struct CubicProfile {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  double T = 1.0;
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();

  double s(double t) const { return a0 + t * (a1 + t * (a2 + t * a3)); }
  double s_dot(double t) const { return a1 + t * (2.0 * a2 + 3.0 * a3 * t); }
  double s_ddot(double t) const { return 2.0 * a2 + 6.0 * a3 * t; }
  double s_dddot() const { return 6.0 * a3; }
};

/// Throws NonpositiveHorizon for T <= 0.
CubicProfile cubic_coeffs(double T);
CubicProfile cubic_profile(double T, const Vec2& start, const Vec2& goal);

struct TrajectorySample {
  Vec2 pos;
  Vec2 vel;
};

/// Throws OutOfHorizon for t outside [0, T].
TrajectorySample sample_trajectory(const CubicProfile& profile, double t);

struct BaselineParams {
  double duration_s = 4.0;
  /// Lower bound on the time budget of a re-fit after a target change.
  double min_refit_s = 0.5;
  double brake_gain = 5.0;
  double dt = 0.01;

  void validate() const;
};

struct BaselineCue {
  int beacon_id = 0;
  Vec2 pos_cm = Vec2::Zero();
};

/// Straight-line cubic reach toward the nearest target, re-fit from rest at the
/// current position whenever the target changes.
class PolyBaseline {
 public:
  explicit PolyBaseline(BaselineParams params);

  /// Command (cm/s^2) that puts the plant on the reference position one tick ahead.
  Vec2 update(double now, const Vec2& p, const Vec2& v, std::span<const BaselineCue> targets, bool stop_visible);

  const std::optional<CubicProfile>& profile() const { return profile_; }
  std::optional<int> target_id() const { return target_id_; }
  int refits() const { return refits_; }

 private:
  BaselineParams params_;
  std::optional<CubicProfile> profile_;
  std::optional<int> target_id_;
  double t_profile_ = 0.0;  // start time of the current profile
  double t_first_ = 0.0;    // start of the first profile, anchors the budget
  int refits_ = 0;
  bool stopped_ = false;
};

}  // namespace neucf
