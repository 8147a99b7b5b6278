#pragma once

#include <array>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "neucf/types.hpp"

namespace neucf {

/// Neuron j prefers the egocentric direction j degrees.
inline constexpr int kNeurons = 181;
using FieldVec = std::array<double, kNeurons>;

struct FieldParams {
  double tau = 0.1;
  double h = -1.0;
  double exc_amp = 1.0;
  double exc_sigma_deg = 5.0;
  double inh_amp = 0.5;
  double inh_sigma_deg = 12.5;
  double global_inh = 0.5;
  double beta = 4.0;
  double u_f = 0.0;
  /// Output is max(0, f(u) - f(h)) so a field at rest exerts no lateral drive.
  bool shifted_output = true;
  double noise_sigma = 0.05;
  double theta_init = 0.5;
  double dt = 0.01;

  /// Throws InvalidParameter.
  void validate() const;
};

struct InputParams {
  double sensory_amp = 3.0;
  double outcome_amp = 1.0;
  double cost_amp = 1.0;
  double sigma_deg = 5.0;
  double pause_amp = 6.0;
  double pause_tau = 0.2;
  double workspace_diag_cm = 70.09279563550022;  // hypot(52, 47)
  /// Directions up to this far outside [0, 180] clamp to the nearest edge.
  double edge_tolerance_deg = 5.0;
  /// Targets closer than this clamp to the nearest edge from any direction.
  double capture_radius_cm = 2.0;

  void validate() const;
};

struct FieldInputs {
  FieldVec sensory{};
  FieldVec outcome{};
  FieldVec cost{};
  FieldVec pause{};

  FieldVec total() const;
};

struct FieldState {
  FieldVec u{};
  FieldInputs inputs;
  double t = 0.0;

  static FieldState resting(const FieldParams& p);
};

/// Orange target as seen by the field. `fresh` means detected on the latest
/// frames; stale but not yet disappeared targets keep their outcome and cost
/// contributions only.
struct TargetCue {
  Vec2 pos_cm = Vec2::Zero();
  bool fresh = true;
};

/// atan2 direction from `ee` to `target` in degrees, in (-180, 180].
double egocentric_angle(const Vec2& ee, const Vec2& target);

/// Maps an egocentric direction onto the field, or nullopt when it cannot be
/// represented at distance `r_cm`.
std::optional<double> field_direction(double angle_deg, double r_cm, const InputParams& ip);

/// Builds the four input vectors. `pause_level` is the current pause ramp value.
/// Throws TargetBehindField for a target whose direction is not representable.
FieldInputs compose_inputs(std::span<const TargetCue> targets, const Vec2& ee, const InputParams& ip,
                           double pause_level = 0.0);

/// First-order ramp toward pause_amp while a stop cue is visible, toward 0 otherwise.
class PauseRamp {
 public:
  double level() const { return level_; }
  double step(bool stop_visible, const InputParams& ip, double dt);
  void reset() { level_ = 0.0; }

 private:
  double level_ = 0.0;
};

FieldVec lateral_kernel(const FieldParams& p);
double output_fn(double u, const FieldParams& p);

/// One Euler step with noise drawn from `rng`. Throws NumericalBlowup.
FieldState step_field(const FieldState& s, const FieldInputs& in, const FieldParams& p, std::mt19937_64& rng);

/// Same step with explicit standard-normal draws, one per neuron.
FieldState step_field(const FieldState& s, const FieldInputs& in, const FieldParams& p,
                      std::span<const double> noise);

struct Desirability {
  FieldVec d{};
  std::vector<int> active;
};

Desirability desirability(const FieldVec& u, double theta_init);

/// Most active supra-threshold neuron; ties go to the lower index.
std::optional<int> winner(const FieldVec& u, double theta_init);

}  // namespace neucf
