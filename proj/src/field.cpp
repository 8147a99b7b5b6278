#include "neucf/field.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace neucf {

void FieldParams::validate() const {
  auto fail = [](const std::string& m) { throw InvalidParameter("field: " + m); };
  if (!(tau > 0.0)) fail("tau must be positive");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (dt > tau / 5.0 + 1e-15) fail("dt must not exceed tau/5");
  if (!(theta_init > h)) fail("theta_init must exceed the resting level h");
  if (!(exc_sigma_deg > 0.0) || !(inh_sigma_deg > 0.0)) fail("kernel widths must be positive");
  if (noise_sigma < 0.0) fail("noise_sigma must be non-negative");
  if (!(beta > 0.0)) fail("beta must be positive");
}

void InputParams::validate() const {
  auto fail = [](const std::string& m) { throw InvalidParameter("inputs: " + m); };
  if (!(sigma_deg > 0.0)) fail("sigma_deg must be positive");
  if (!(pause_tau > 0.0)) fail("pause_tau must be positive");
  if (!(workspace_diag_cm > 0.0)) fail("workspace_diag_cm must be positive");
  if (edge_tolerance_deg < 0.0 || capture_radius_cm < 0.0) fail("tolerances must be non-negative");
}

FieldVec FieldInputs::total() const {
  FieldVec out;
  for (int j = 0; j < kNeurons; ++j) out[j] = sensory[j] + outcome[j] + cost[j] + pause[j];
  return out;
}

FieldState FieldState::resting(const FieldParams& p) {
  FieldState s;
  s.u.fill(p.h);
  return s;
}

double egocentric_angle(const Vec2& ee, const Vec2& target) {
  const Vec2 d = target - ee;
  return std::atan2(d.y(), d.x()) * 180.0 / std::numbers::pi;
}

std::optional<double> field_direction(double angle_deg, double r_cm, const InputParams& ip) {
  if (angle_deg >= 0.0 && angle_deg <= 180.0) return angle_deg;
  if (angle_deg >= -ip.edge_tolerance_deg && angle_deg < 0.0) return 0.0;
  if (angle_deg > 180.0 && angle_deg <= 180.0 + ip.edge_tolerance_deg) return 180.0;
  if (r_cm < ip.capture_radius_cm) return angle_deg < -90.0 ? 180.0 : 0.0;
  return std::nullopt;
}

FieldInputs compose_inputs(std::span<const TargetCue> targets, const Vec2& ee, const InputParams& ip,
                           double pause_level) {
  FieldInputs in;
  const double inv2s2 = 1.0 / (2.0 * ip.sigma_deg * ip.sigma_deg);
  for (const TargetCue& c : targets) {
    const double r = (c.pos_cm - ee).norm();
    if (r < 1e-9) continue;
    const double ang = egocentric_angle(ee, c.pos_cm);
    const auto th = field_direction(ang, r, ip);
    if (!th) {
      throw TargetBehindField("target at (" + std::to_string(c.pos_cm.x()) + ", " +
                              std::to_string(c.pos_cm.y()) + ") lies at " + std::to_string(ang) +
                              " deg, outside the field");
    }
    const double a_s = c.fresh ? ip.sensory_amp : 0.0;
    const double a_c = ip.cost_amp * r / ip.workspace_diag_cm;
    for (int j = 0; j < kNeurons; ++j) {
      const double d = j - *th;
      const double g = std::exp(-d * d * inv2s2);
      in.sensory[j] += a_s * g;
      in.outcome[j] += ip.outcome_amp * g;
      in.cost[j] -= a_c * g;
    }
  }
  in.pause.fill(-pause_level);
  return in;
}

double PauseRamp::step(bool stop_visible, const InputParams& ip, double dt) {
  const double target = stop_visible ? ip.pause_amp : 0.0;
  level_ += dt / ip.pause_tau * (target - level_);
  return level_;
}

FieldVec lateral_kernel(const FieldParams& p) {
  FieldVec w;
  const double e = 1.0 / (2.0 * p.exc_sigma_deg * p.exc_sigma_deg);
  const double i = 1.0 / (2.0 * p.inh_sigma_deg * p.inh_sigma_deg);
  for (int d = 0; d < kNeurons; ++d) {
    const double dd = static_cast<double>(d) * d;
    w[d] = p.exc_amp * std::exp(-dd * e) - p.inh_amp * std::exp(-dd * i);
  }
  return w;
}

double output_fn(double u, const FieldParams& p) {
  const double f = 1.0 / (1.0 + std::exp(-p.beta * (u - p.u_f)));
  if (!p.shifted_output) return f;
  const double f_rest = 1.0 / (1.0 + std::exp(-p.beta * (p.h - p.u_f)));
  return f > f_rest ? f - f_rest : 0.0;
}

FieldState step_field(const FieldState& s, const FieldInputs& in, const FieldParams& p,
                      std::span<const double> noise) {
  if (noise.size() != static_cast<std::size_t>(kNeurons)) {
    throw InvalidParameter("noise vector must hold one draw per neuron");
  }
  const FieldVec w = lateral_kernel(p);
  FieldVec f;
  for (int j = 0; j < kNeurons; ++j) f[j] = output_fn(s.u[j], p);

  // Both sums pair neurons symmetrically so mirrored inputs give bitwise
  // mirrored results.
  constexpr int mid = kNeurons / 2;
  double total = f[mid];
  for (int d = 1; d <= mid; ++d) total += f[mid - d] + f[mid + d];

  const FieldVec drive = in.total();
  const double k = p.dt / p.tau;
  const double nscale = p.noise_sigma * std::sqrt(p.dt);

  FieldState out;
  out.inputs = in;
  out.t = s.t + p.dt;
  for (int i = 0; i < kNeurons; ++i) {
    double lat = w[0] * f[i];
    for (int d = 1; d < kNeurons; ++d) {
      if (i - d < 0 && i + d >= kNeurons) break;
      const double lo = i - d >= 0 ? f[i - d] : 0.0;
      const double hi = i + d < kNeurons ? f[i + d] : 0.0;
      lat += w[d] * (lo + hi);
    }
    lat -= p.global_inh * total;
    const double u = s.u[i] + k * (-s.u[i] + p.h + drive[i] + lat) + nscale * noise[i];
    if (!std::isfinite(u) || std::abs(u) > 1e6) {
      throw NumericalBlowup("neuron " + std::to_string(i) + " activity diverged at t=" +
                            std::to_string(out.t));
    }
    out.u[i] = u;
  }
  return out;
}

FieldState step_field(const FieldState& s, const FieldInputs& in, const FieldParams& p, std::mt19937_64& rng) {
  std::array<double, kNeurons> noise{};
  if (p.noise_sigma > 0.0) {
    std::normal_distribution<double> n01(0.0, 1.0);
    for (double& x : noise) x = n01(rng);
  }
  return step_field(s, in, p, noise);
}

Desirability desirability(const FieldVec& u, double theta_init) {
  Desirability out;
  double sum = 0.0;
  for (int j = 0; j < kNeurons; ++j) {
    if (u[j] > theta_init) {
      out.active.push_back(j);
      sum += u[j] - theta_init;
    }
  }
  for (int j : out.active) out.d[j] = (u[j] - theta_init) / sum;
  return out;
}

std::optional<int> winner(const FieldVec& u, double theta_init) {
  std::optional<int> best;
  for (int j = 0; j < kNeurons; ++j) {
    if (u[j] > theta_init && (!best || u[j] > u[*best])) best = j;
  }
  return best;
}

}  // namespace neucf
