#include "neucf/baseline.hpp"

#include <algorithm>
#include <string>

namespace neucf {

CubicProfile cubic_coeffs(double T) {
  if (!(T > 0.0)) throw NonpositiveHorizon("cubic horizon must be positive, got " + std::to_string(T));
  CubicProfile c;
  c.T = T;
  c.a2 = 3.0 / (T * T);
  c.a3 = -2.0 / (T * T * T);
  return c;
}

CubicProfile cubic_profile(double T, const Vec2& start, const Vec2& goal) {
  CubicProfile c = cubic_coeffs(T);
  c.start = start;
  c.goal = goal;
  return c;
}

TrajectorySample sample_trajectory(const CubicProfile& profile, double t) {
  if (t < 0.0 || t > profile.T) {
    throw OutOfHorizon("t=" + std::to_string(t) + " outside [0, " + std::to_string(profile.T) + "]");
  }
  const Vec2 d = profile.goal - profile.start;
  return {profile.start + profile.s(t) * d, profile.s_dot(t) * d};
}

void BaselineParams::validate() const {
  if (!(duration_s > 0.0)) throw NonpositiveHorizon("baseline duration must be positive");
  if (!(min_refit_s > 0.0) || !(dt > 0.0) || brake_gain < 0.0) {
    throw InvalidParameter("baseline: invalid timing parameters");
  }
}

PolyBaseline::PolyBaseline(BaselineParams params) : params_(params) { params_.validate(); }

Vec2 PolyBaseline::update(double now, const Vec2& p, const Vec2& v, std::span<const BaselineCue> targets,
                          bool stop_visible) {
  if (stop_visible) stopped_ = true;
  if (stopped_) {
    profile_.reset();
    target_id_.reset();
    return -params_.brake_gain * v;
  }

  const BaselineCue* keep = nullptr;
  const BaselineCue* nearest = nullptr;
  for (const BaselineCue& c : targets) {
    if (target_id_ && c.beacon_id == *target_id_) keep = &c;
    if (!nearest || (c.pos_cm - p).norm() < (nearest->pos_cm - p).norm()) nearest = &c;
  }
  const BaselineCue* chosen = keep ? keep : nearest;

  if (chosen && (!target_id_ || chosen->beacon_id != *target_id_)) {
    double T = params_.duration_s;
    if (target_id_ || profile_) {
      T = std::max(params_.min_refit_s, params_.duration_s - (now - t_first_));
      ++refits_;
    } else {
      t_first_ = now;
    }
    profile_ = cubic_profile(T, p, chosen->pos_cm);
    target_id_ = chosen->beacon_id;
    t_profile_ = now;
  }

  if (!profile_) return -params_.brake_gain * v;
  const double tau = std::clamp(now + params_.dt - t_profile_, 0.0, profile_->T);
  const Vec2 v_cmd = (sample_trajectory(*profile_, tau).pos - p) / params_.dt;
  return (v_cmd - v) / params_.dt;
}

}  // namespace neucf
