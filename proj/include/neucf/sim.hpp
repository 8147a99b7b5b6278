#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "neucf/baseline.hpp"
#include "neucf/controller.hpp"
#include "neucf/field.hpp"
#include "neucf/geometry.hpp"
#include "neucf/metrics.hpp"
#include "neucf/scenario.hpp"
#include "neucf/tracker.hpp"
#include "neucf/vision.hpp"

namespace neucf {

struct PlantState {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  double t = 0.0;
};

/// Semi-implicit Euler with the speed clamp applied to the new velocity.
PlantState plant_step(const PlantState& s, const Vec2& u, double dt, double max_speed = 25.0);

struct SimConfig {
  double dt = 0.01;
  double max_speed = 25.0;
  double camera_fps = 30.0;
  bool vision_mode = false;
  double goal_pos_tol_cm = 0.5;
  double goal_speed_tol = 0.5;
  double stop_speed_tol = 0.05;
  /// A target counts as currently sensed if detected within this window.
  double fresh_window_s = 0.1;
  bool record_field = true;

  WorkspaceCalib calib;
  FieldParams field;
  InputParams inputs;
  BankParams bank;
  BaselineParams baseline;
  TrackerConfig tracker;
  SegmentationConfig segmentation;

  /// Copies the shared step and calibration into the sub-configs and validates them.
  SimConfig synced() const;
};

enum class RunStatus { Running, Goal, Stopped, Timeout };
std::string_view to_string(RunStatus s);

struct LogSample {
  double t = 0.0;
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  Vec2 u = Vec2::Zero();
  int winner = -1;
  int active_count = 0;
};

struct TrajectoryLog {
  std::vector<LogSample> samples;
  std::vector<FieldVec> field;  // one row per sample when recorded

  std::vector<Vec2> positions() const;
};

/// World beacon as placed by events; ids follow add order.
struct WorldBeacon {
  int id = 0;
  BeaconColor color = BeaconColor::Orange;
  Vec2 pos_cm = Vec2::Zero();
  bool present = true;
};

/// Deterministic closed-loop runner that can be advanced one tick at a time.
class Simulation {
 public:
  Simulation(ScenarioScript script, SimConfig cfg);

  /// Advances one control tick; no-op once finished.
  void step();
  void run();

  bool finished() const { return status_ != RunStatus::Running; }
  RunStatus status() const { return status_; }
  long tick() const { return k_; }
  /// Tick time, computed as k / rate when 1/dt is integral so logged times print exactly.
  double time() const;

  /// Queues a live event for the next tick. Throws ValidationError for unknown
  /// ids or positions outside the workspace. Returns the id an add will get.
  int inject(const BeaconEvent& e);
  /// Live events with the tick times at which they were applied.
  const std::vector<BeaconEvent>& applied_live_events() const { return applied_live_; }

  const ScenarioScript& script() const { return script_; }
  const SimConfig& config() const { return cfg_; }
  const PlantState& plant() const { return plant_; }
  const TrajectoryLog& log() const { return log_; }
  const std::vector<BeaconTrack>& tracks() const { return tracker_.tracks(); }
  const std::vector<WorldBeacon>& world() const { return world_; }
  const FieldState& field() const { return field_; }
  const Desirability& desirability_now() const { return desire_; }
  std::optional<int> winner_now() const { return winner_; }
  const ControllerBank* bank() const { return bank_.get(); }
  const PolyBaseline* baseline() const { return baseline_.get(); }
  /// First tick time with a nonzero command, when any.
  std::optional<double> onset() const { return onset_; }

 private:
  void apply(const BeaconEvent& e);
  void check_live(const BeaconEvent& e) const;
  std::vector<Detection> sense();

  ScenarioScript script_;
  SimConfig cfg_;
  std::mt19937_64 rng_;
  BeaconTracker tracker_;
  std::optional<SyntheticCamera> camera_;
  RasterImage frame_;
  std::unique_ptr<ControllerBank> bank_;
  std::unique_ptr<PolyBaseline> baseline_;

  PlantState plant_;
  FieldState field_;
  PauseRamp pause_;
  Desirability desire_;
  std::optional<int> winner_;
  std::vector<WorldBeacon> world_;
  std::size_t next_event_ = 0;
  std::deque<BeaconEvent> pending_live_;
  std::vector<BeaconEvent> applied_live_;
  int next_world_id_ = 0;
  int queued_adds_ = 0;
  long k_ = 0;
  long last_frame_ = -1;
  RunStatus status_ = RunStatus::Running;
  std::optional<double> onset_;
  TrajectoryLog log_;
};

struct RunResult {
  ScenarioScript script;
  RunStatus status = RunStatus::Running;
  TrajectoryLog log;
  MetricsBundle metrics;
  double t_end = 0.0;
  std::optional<double> onset;
  std::optional<Vec2> target;
  Vec2 final_pos = Vec2::Zero();
};

/// Present orange beacon nearest to `p`, used as the reference for error rows.
std::optional<Vec2> reference_target(const std::vector<WorldBeacon>& world, const Vec2& p);

/// Result of a simulation in its current state.
RunResult summarize_run(const Simulation& sim);

/// Runs a script to termination. Throws ScenarioInvalid for invalid scripts.
RunResult run_scenario(const ScenarioScript& script, const SimConfig& cfg);

}  // namespace neucf
