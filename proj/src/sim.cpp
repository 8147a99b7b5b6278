#include "neucf/sim.hpp"

#include <algorithm>
#include <cmath>

namespace neucf {

PlantState plant_step(const PlantState& s, const Vec2& u, double dt, double max_speed) {
  PlantState out;
  out.v = s.v + u * dt;
  const double speed = out.v.norm();
  if (speed > max_speed) {
    out.v *= max_speed / speed;
    while (out.v.norm() > max_speed) out.v *= 1.0 - 1e-16;
  }
  out.p = s.p + out.v * dt;
  out.t = s.t + dt;
  return out;
}

SimConfig SimConfig::synced() const {
  SimConfig c = *this;
  if (!(c.dt > 0.0)) throw InvalidParameter("dt must be positive");
  if (!(c.camera_fps > 0.0)) throw InvalidParameter("camera_fps must be positive");
  if (!(c.max_speed > 0.0)) throw InvalidParameter("max_speed must be positive");
  c.field.dt = c.dt;
  c.bank.dt = c.dt;
  c.baseline.dt = c.dt;
  c.tracker.calib = c.calib;
  c.inputs.workspace_diag_cm = std::hypot(c.calib.width_cm, c.calib.height_cm);
  c.calib.validate();
  c.field.validate();
  c.inputs.validate();
  c.bank.validate();
  c.baseline.validate();
  return c;
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Running:
      return "running";
    case RunStatus::Goal:
      return "goal";
    case RunStatus::Stopped:
      return "stopped";
    case RunStatus::Timeout:
      return "timeout";
  }
  return "running";
}

std::vector<Vec2> TrajectoryLog::positions() const {
  std::vector<Vec2> out;
  out.reserve(samples.size());
  for (const LogSample& s : samples) out.push_back(s.p);
  return out;
}

namespace {

SimConfig configure(const ScenarioScript& script, SimConfig cfg) {
  validate_script(script);
  const double px_per_cm_x = cfg.calib.x_max / cfg.calib.width_cm;
  const double px_per_cm_y = cfg.calib.y_max / cfg.calib.height_cm;
  cfg.calib.width_cm = script.width_cm;
  cfg.calib.height_cm = script.height_cm;
  cfg.calib.x_max = px_per_cm_x * script.width_cm;
  cfg.calib.y_max = px_per_cm_y * script.height_cm;
  if (script.baseline_duration) cfg.baseline.duration_s = *script.baseline_duration;
  return cfg.synced();
}

}  // namespace

Simulation::Simulation(ScenarioScript script, SimConfig cfg)
    : script_(std::move(script)), cfg_(configure(script_, cfg)), rng_(script_.seed), tracker_(cfg_.tracker) {
  if (cfg_.vision_mode) camera_.emplace(SyntheticCamera::default_rig(cfg_.calib));
  if (script_.controller == ControllerKind::NeuCF) {
    bank_ = std::make_unique<ControllerBank>(cfg_.bank);
  } else {
    baseline_ = std::make_unique<PolyBaseline>(cfg_.baseline);
  }
  field_ = FieldState::resting(cfg_.field);
}

void Simulation::apply(const BeaconEvent& e) {
  switch (e.action) {
    case EventAction::Add:
      world_.push_back({next_world_id_++, e.color, e.pos_cm, true});
      break;
    case EventAction::Remove:
      world_.at(e.id).present = false;
      break;
    case EventAction::Move:
      world_.at(e.id).pos_cm = e.pos_cm;
      break;
  }
}

void Simulation::check_live(const BeaconEvent& e) const {
  if (e.action == EventAction::Add || e.action == EventAction::Move) {
    const Vec2& p = e.pos_cm;
    if (!p.allFinite() || p.x() < 0.0 || p.y() < 0.0 || p.x() > script_.width_cm || p.y() > script_.height_cm) {
      throw ValidationError("position out of bounds");
    }
  }
  if (e.action == EventAction::Remove || e.action == EventAction::Move) {
    const bool live = e.id >= 0 && e.id < static_cast<int>(world_.size()) && world_[e.id].present;
    const bool removal_queued = std::any_of(pending_live_.begin(), pending_live_.end(), [&](const BeaconEvent& q) {
      return q.action == EventAction::Remove && q.id == e.id;
    });
    if (!live || removal_queued) throw ValidationError("unknown id");
  }
}

double Simulation::time() const {
  const double rate = 1.0 / cfg_.dt;
  const double whole = std::round(rate);
  if (std::abs(rate - whole) < 1e-9 * whole) return static_cast<double>(k_) / whole;
  return static_cast<double>(k_) * cfg_.dt;
}

int Simulation::inject(const BeaconEvent& e) {
  check_live(e);
  pending_live_.push_back(e);
  if (e.action != EventAction::Add) return e.id;
  int scripted = 0;
  for (std::size_t i = next_event_; i < script_.events.size() && script_.events[i].t <= time() + 1e-9; ++i) {
    scripted += script_.events[i].action == EventAction::Add;
  }
  return next_world_id_ + scripted + queued_adds_++;
}

std::vector<Detection> Simulation::sense() {
  std::vector<Detection> dets;
  if (!camera_) {
    for (const WorldBeacon& b : world_) {
      if (b.present) dets.push_back(make_detection(b.color, world_to_pixel(cfg_.calib, b.pos_cm), cfg_.calib));
    }
    return dets;
  }
  std::vector<SceneBall> balls;
  for (const WorldBeacon& b : world_) {
    if (b.present) balls.push_back({b.color, b.pos_cm});
  }
  camera_->render_into(frame_, balls);
  for (const Blob& blob : segment_beacons(frame_, cfg_.segmentation)) {
    try {
      dets.push_back(make_detection(blob.color, apply_affine(camera_->calibration().affine, blob.centroid), cfg_.calib));
    } catch (const OutOfFrame&) {
    }
  }
  return dets;
}

void Simulation::step() {
  if (finished()) return;
  const double t = time();
  const double dt = cfg_.dt;

  while (next_event_ < script_.events.size() && script_.events[next_event_].t <= t + 1e-9) {
    apply(script_.events[next_event_++]);
  }
  while (!pending_live_.empty()) {
    BeaconEvent e = pending_live_.front();
    pending_live_.pop_front();
    if (e.action == EventAction::Add) --queued_adds_;
    e.t = t;
    apply(e);
    applied_live_.push_back(e);
  }

  const long frame = static_cast<long>(std::floor(t * cfg_.camera_fps + 1e-9));
  if (frame > last_frame_) {
    last_frame_ = frame;
    tracker_.update(t, sense());
  }

  const Vec2 p = plant_.p, v = plant_.v;
  bool stop_visible = false;
  std::vector<TargetCue> cues;
  std::vector<BankCue> bank_cues;
  std::vector<BaselineCue> base_cues;
  std::vector<Vec2> fresh_targets;
  for (const BeaconTrack& tr : tracker_.tracks()) {
    if (tr.disappeared()) continue;
    if (tr.color == BeaconColor::Green) {
      stop_visible = true;
      continue;
    }
    const bool fresh = t - tr.t_vis <= cfg_.fresh_window_s + 1e-9;
    if (fresh) {
      base_cues.push_back({tr.id, tr.pos_real});
      fresh_targets.push_back(tr.pos_real);
    }
    const double r = (tr.pos_real - p).norm();
    if (r < 1e-9) continue;
    const auto th = field_direction(egocentric_angle(p, tr.pos_real), r, cfg_.inputs);
    if (!th) continue;
    cues.push_back({tr.pos_real, fresh});
    bank_cues.push_back({tr.id, *th, r});
  }

  pause_.step(stop_visible, cfg_.inputs, dt);
  const FieldInputs inputs = compose_inputs(cues, p, cfg_.inputs, pause_.level());
  field_ = step_field(field_, inputs, cfg_.field, rng_);
  desire_ = desirability(field_.u, cfg_.field.theta_init);
  winner_ = winner(field_.u, cfg_.field.theta_init);

  Vec2 u;
  if (bank_) {
    Vec4 x;
    x << p, v;
    u = bank_->update(k_, desire_, winner_, bank_cues, x);
  } else {
    u = baseline_->update(t, p, v, base_cues, stop_visible);
  }
  if (!onset_ && u.squaredNorm() > 0.0) onset_ = t;

  log_.samples.push_back({t, p, v, u, winner_.value_or(-1), static_cast<int>(desire_.active.size())});
  if (cfg_.record_field) log_.field.push_back(field_.u);

  const double speed = v.norm();
  const bool at_goal = speed < cfg_.goal_speed_tol && std::any_of(fresh_targets.begin(), fresh_targets.end(), [&](const Vec2& g) {
                         return (g - p).norm() < cfg_.goal_pos_tol_cm;
                       });
  if (at_goal) {
    status_ = RunStatus::Goal;
  } else if (stop_visible && desire_.active.empty() && speed < cfg_.stop_speed_tol) {
    status_ = RunStatus::Stopped;
  } else if (static_cast<double>(k_ + 1) * dt > script_.time_limit + 1e-9) {
    status_ = RunStatus::Timeout;
  }
  if (finished()) return;

  plant_ = plant_step(plant_, u, dt, cfg_.max_speed);
  ++k_;
  plant_.t = time();
}

void Simulation::run() {
  while (!finished()) step();
}

std::optional<Vec2> reference_target(const std::vector<WorldBeacon>& world, const Vec2& p) {
  std::optional<Vec2> best;
  for (const WorldBeacon& b : world) {
    if (!b.present || b.color != BeaconColor::Orange) continue;
    if (!best || (b.pos_cm - p).norm() < (*best - p).norm()) best = b.pos_cm;
  }
  return best;
}

RunResult summarize_run(const Simulation& sim) {
  RunResult r;
  r.script = sim.script();
  r.status = sim.status();
  r.onset = sim.onset();
  r.final_pos = sim.plant().p;
  r.t_end = sim.log().samples.empty() ? 0.0 : sim.log().samples.back().t;
  r.target = reference_target(sim.world(), r.final_pos);
  r.metrics = compute_metrics(sim.log().positions(), sim.config().dt, r.target);
  r.log = sim.log();
  return r;
}

RunResult run_scenario(const ScenarioScript& script, const SimConfig& cfg) {
  Simulation sim(script, cfg);
  sim.run();
  return summarize_run(sim);
}

}  // namespace neucf
