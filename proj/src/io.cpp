#include "neucf/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace neucf {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x + 0.0);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
  out << "t,px,py,vx,vy,ux,uy,winner,active_count\n";
  for (const LogSample& s : log.samples) {
    out << format_double(s.t) << ',' << format_double(s.p.x()) << ',' << format_double(s.p.y()) << ','
        << format_double(s.v.x()) << ',' << format_double(s.v.y()) << ',' << format_double(s.u.x()) << ','
        << format_double(s.u.y()) << ',' << s.winner << ',' << s.active_count << '\n';
  }
}

void write_field_csv(std::ostream& out, const TrajectoryLog& log) {
  out << 't';
  for (int j = 0; j < kNeurons; ++j) out << ",u_" << j;
  out << '\n';
  for (std::size_t i = 0; i < log.field.size() && i < log.samples.size(); ++i) {
    out << format_double(log.samples[i].t);
    for (double u : log.field[i]) out << ',' << format_double(u);
    out << '\n';
  }
}

namespace {

class ConfigWriter {
 public:
  explicit ConfigWriter(json& root) : cur_(&root) {}
  void num(const char* k, double& x) { (*cur_)[k] = x; }
  void integer(const char* k, int& x) { (*cur_)[k] = x; }
  void flag(const char* k, bool& x) { (*cur_)[k] = x; }
  void window(const char* k, HueWindow& w) { (*cur_)[k] = {w.lo_deg, w.hi_deg}; }
  template <typename F>
  void section(const char* k, F&& f) {
    json sub = json::object();
    json* saved = cur_;
    cur_ = &sub;
    f();
    cur_ = saved;
    (*cur_)[k] = std::move(sub);
  }

 private:
  json* cur_;
};

class ConfigReader {
 public:
  explicit ConfigReader(const json& root) : cur_(&root) {
    if (!root.is_object()) throw ValidationError("config must be a JSON object");
    seen_.emplace_back();
  }
  void num(const char* k, double& x) {
    if (const json* v = get(k)) {
      if (!v->is_number()) fail(k, "a number");
      x = v->get<double>();
    }
  }
  void integer(const char* k, int& x) {
    if (const json* v = get(k)) {
      if (!v->is_number_integer()) fail(k, "an integer");
      x = v->get<int>();
    }
  }
  void flag(const char* k, bool& x) {
    if (const json* v = get(k)) {
      if (!v->is_boolean()) fail(k, "a boolean");
      x = v->get<bool>();
    }
  }
  void window(const char* k, HueWindow& w) {
    if (const json* v = get(k)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) fail(k, "[lo, hi]");
      w = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }
  template <typename F>
  void section(const char* k, F&& f) {
    const json* v = get(k);
    if (!v) return;
    if (!v->is_object()) fail(k, "an object");
    const json* saved = cur_;
    cur_ = v;
    path_.push_back(k);
    seen_.emplace_back();
    f();
    finish();
    seen_.pop_back();
    path_.pop_back();
    cur_ = saved;
  }
  void finish() const {
    for (const auto& [key, _] : cur_->items()) {
      if (!seen_.back().count(key)) throw ValidationError("config: unknown key '" + where() + key + "'");
    }
  }

 private:
  const json* get(const char* k) {
    seen_.back().insert(k);
    return cur_->contains(k) ? &cur_->at(k) : nullptr;
  }
  std::string where() const {
    std::string s;
    for (const auto& p : path_) s += p + ".";
    return s;
  }
  [[noreturn]] void fail(const char* k, const char* what) const {
    throw ValidationError("config: '" + where() + k + "' must be " + what);
  }

  const json* cur_;
  std::vector<std::string> path_;
  std::vector<std::set<std::string>> seen_;
};

template <typename V>
void visit_config(SimConfig& c, V& v) {
  v.num("dt", c.dt);
  v.num("max_speed", c.max_speed);
  v.num("camera_fps", c.camera_fps);
  v.flag("vision_mode", c.vision_mode);
  v.num("goal_pos_tol_cm", c.goal_pos_tol_cm);
  v.num("goal_speed_tol", c.goal_speed_tol);
  v.num("stop_speed_tol", c.stop_speed_tol);
  v.num("fresh_window_s", c.fresh_window_s);
  v.flag("record_field", c.record_field);
  v.section("calib", [&] {
    v.num("x_max", c.calib.x_max);
    v.num("y_max", c.calib.y_max);
    v.num("width_cm", c.calib.width_cm);
    v.num("height_cm", c.calib.height_cm);
  });
  v.section("field", [&] {
    FieldParams& f = c.field;
    v.num("tau", f.tau);
    v.num("h", f.h);
    v.num("exc_amp", f.exc_amp);
    v.num("exc_sigma_deg", f.exc_sigma_deg);
    v.num("inh_amp", f.inh_amp);
    v.num("inh_sigma_deg", f.inh_sigma_deg);
    v.num("global_inh", f.global_inh);
    v.num("beta", f.beta);
    v.num("u_f", f.u_f);
    v.flag("shifted_output", f.shifted_output);
    v.num("noise_sigma", f.noise_sigma);
    v.num("theta_init", f.theta_init);
  });
  v.section("inputs", [&] {
    InputParams& i = c.inputs;
    v.num("sensory_amp", i.sensory_amp);
    v.num("outcome_amp", i.outcome_amp);
    v.num("cost_amp", i.cost_amp);
    v.num("sigma_deg", i.sigma_deg);
    v.num("pause_amp", i.pause_amp);
    v.num("pause_tau", i.pause_tau);
    v.num("edge_tolerance_deg", i.edge_tolerance_deg);
    v.num("capture_radius_cm", i.capture_radius_cm);
  });
  v.section("bank", [&] {
    BankParams& b = c.bank;
    v.section("weights", [&] {
      v.num("q_p", b.weights.q_p);
      v.num("q_v", b.weights.q_v);
      v.num("r", b.weights.r);
    });
    v.num("v_nom", b.v_nom);
    v.integer("max_steps", b.max_steps);
    v.integer("min_steps", b.min_steps);
    v.num("replan_tol_cm", b.replan_tol_cm);
    v.num("brake_gain", b.brake_gain);
    v.num("min_reach_cm", b.min_reach_cm);
    v.flag("wta_only", b.wta_only);
  });
  v.section("baseline", [&] {
    v.num("duration_s", c.baseline.duration_s);
    v.num("min_refit_s", c.baseline.min_refit_s);
    v.num("brake_gain", c.baseline.brake_gain);
  });
  v.section("tracker", [&] {
    v.num("disappear_after_s", c.tracker.disappear_after_s);
    v.num("move_fraction", c.tracker.move_fraction);
    v.num("gate_fraction", c.tracker.gate_fraction);
    v.num("gc_after_s", c.tracker.gc_after_s);
  });
  v.section("segmentation", [&] {
    SegmentationConfig& s = c.segmentation;
    v.window("orange", s.orange);
    v.window("green", s.green);
    v.num("min_saturation", s.min_saturation);
    v.num("min_value", s.min_value);
    v.num("min_area_fraction", s.min_area_fraction);
  });
}

}  // namespace

json sim_config_to_json(const SimConfig& c) {
  json out = json::object();
  SimConfig copy = c;
  ConfigWriter w(out);
  visit_config(copy, w);
  return out;
}

void apply_sim_config(SimConfig& c, const json& j) {
  ConfigReader r(j);
  SimConfig next = c;
  visit_config(next, r);
  r.finish();
  c = next;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw MissingFile("file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioScript load_scenario(const std::string& spec) {
  constexpr std::string_view prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) {
    const std::string name = spec.substr(prefix.size());
    if (auto s = builtin_scenario(name)) return *s;
    throw ValidationError("unknown builtin scenario '" + name + "'");
  }
  return parse_scenario(read_text_file(spec));
}

ResolvedRun resolve_run(const RunConfig& cfg) {
  SimConfig sim;
  std::optional<ScenarioScript> script;
  if (cfg.config_path) {
    const std::string text = read_text_file(*cfg.config_path);
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError("malformed config " + cfg.config_path->string() + ": " + e.what());
    }
    if (!j.is_object()) throw ValidationError("config file must hold a JSON object");
    static const std::set<std::string> allowed{"scenario", "config", "tool", "version", "seed",
                                               "controller", "status", "t_end", "onset"};
    for (const auto& [key, _] : j.items()) {
      if (!allowed.count(key)) throw ValidationError("config file: unknown key '" + key + "'");
    }
    if (j.contains("config")) apply_sim_config(sim, j.at("config"));
    if (j.contains("scenario")) {
      try {
        script = scenario_from_json(j.at("scenario"));
      } catch (const json::exception& e) {
        throw ValidationError(std::string("config file scenario: ") + e.what());
      }
    }
  }
  if (cfg.scenario) script = load_scenario(*cfg.scenario);
  if (!script) throw ValidationError("no scenario given (use --scenario or a config file with a scenario)");
  if (cfg.seed) script->seed = *cfg.seed;
  if (cfg.controller) script->controller = *cfg.controller;
  if (cfg.dt) sim.dt = *cfg.dt;
  if (cfg.vision_mode) sim.vision_mode = true;
  return {*script, sim};
}

json run_meta(const ResolvedRun& run, const RunResult& result) {
  return json{{"tool", "neucf"},
              {"version", std::string(kVersion)},
              {"seed", run.script.seed},
              {"controller", std::string(to_string(run.script.controller))},
              {"status", std::string(to_string(result.status))},
              {"t_end", result.t_end},
              {"onset", result.onset ? json(*result.onset) : json(nullptr)},
              {"scenario", scenario_to_json(run.script)},
              {"config", sim_config_to_json(run.sim)}};
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_run_artifacts(const std::filesystem::path& dir, const ResolvedRun& run, const RunResult& result) {
  std::filesystem::create_directories(dir);
  std::ostringstream traj, field;
  write_trajectory_csv(traj, result.log);
  write_field_csv(field, result.log);
  write_file(dir / "trajectory.csv", traj.str());
  write_file(dir / "field_history.csv", field.str());
  write_file(dir / "metrics.json", json(result.metrics).dump(2) + "\n");
  write_file(dir / "run_meta.json", run_meta(run, result).dump(2) + "\n");
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const ResolvedRun run = resolve_run(cfg);
    const RunResult result = run_scenario(run.script, run.sim);
    write_run_artifacts(cfg.out_dir, run, result);
    out << run.script.name << ": " << to_string(result.status) << " at t=" << format_double(result.t_end)
        << " s, final (" << format_double(result.final_pos.x()) << ", " << format_double(result.final_pos.y())
        << ") cm -> " << cfg.out_dir.string() << "\n";
    return 0;
  } catch (const MissingFile& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

CompareReport cmd_compare(const std::vector<ScenarioScript>& scenarios, std::uint64_t seed, int repeats,
                          const SimConfig& sim) {
  if (repeats < 1) throw ValidationError("repeats must be at least 1");
  CompareReport report;
  for (const ScenarioScript& base : scenarios) {
    CompareCell cell;
    cell.scenario = base.name;
    std::vector<MetricsBundle> neucf_runs, poly_runs;
    for (int r = 0; r < repeats; ++r) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(r);
      cell.seeds.push_back(s);
      ScenarioScript script = base;
      script.seed = s;
      std::optional<double> duration;
      try {
        script.controller = ControllerKind::NeuCF;
        const RunResult res = run_scenario(script, sim);
        neucf_runs.push_back(res.metrics);
        if (res.onset && res.t_end > *res.onset) duration = res.t_end - *res.onset;
      } catch (const Error& e) {
        cell.failures.push_back("neucf seed " + std::to_string(s) + ": " + e.kind() + ": " + e.what());
      }
      try {
        script.controller = ControllerKind::Poly;
        if (duration) script.baseline_duration = duration;
        poly_runs.push_back(run_scenario(script, sim).metrics);
      } catch (const Error& e) {
        cell.failures.push_back("poly seed " + std::to_string(s) + ": " + e.kind() + ": " + e.what());
      }
    }
    if (static_cast<int>(neucf_runs.size()) == repeats) cell.neucf = aggregate_metrics(neucf_runs);
    if (static_cast<int>(poly_runs.size()) == repeats) cell.poly = aggregate_metrics(poly_runs);
    report.cells.push_back(std::move(cell));
  }
  return report;
}

json CompareReport::to_json() const {
  json cells_json = json::array();
  for (const CompareCell& c : cells) {
    cells_json.push_back({{"scenario", c.scenario},
                          {"seeds", c.seeds},
                          {"neucf", c.neucf ? json(*c.neucf) : json("FAILED")},
                          {"poly", c.poly ? json(*c.poly) : json("FAILED")},
                          {"failures", c.failures}});
  }
  return json{{"version", std::string(kVersion)}, {"cells", std::move(cells_json)}};
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string cell_text(const std::optional<MetricsBundle>& m, const std::optional<MeanStd> MetricsBundle::*ms) {
  if (!m) return "FAILED";
  const auto& v = (*m).*ms;
  return v ? fmt(v->mean) + " +- " + fmt(v->std) : "n/a";
}

std::string cell_text(const std::optional<MetricsBundle>& m, const std::optional<double> MetricsBundle::*a,
                      const std::optional<double> MetricsBundle::*b = nullptr) {
  if (!m) return "FAILED";
  const auto& va = (*m).*a;
  if (!va) return "n/a";
  if (!b) return fmt(*va);
  const auto& vb = (*m).*b;
  return fmt(*va) + " +- " + (vb ? fmt(*vb) : "n/a");
}

}  // namespace

std::string CompareReport::to_text() const {
  std::ostringstream out;
  char line[160];
  for (const CompareCell& c : cells) {
    out << "== " << c.scenario << " (seeds";
    for (auto s : c.seeds) out << ' ' << s;
    out << ")\n";
    std::snprintf(line, sizeof line, "%-26s %-24s %-24s\n", "metric", "NeuCF", "Polynomial");
    out << line;
    auto row = [&](const char* name, const std::string& a, const std::string& b) {
      std::snprintf(line, sizeof line, "%-26s %-24s %-24s\n", name, a.c_str(), b.c_str());
      out << line;
    };
    row("X Error (cm)", cell_text(c.neucf, &MetricsBundle::err_x), cell_text(c.poly, &MetricsBundle::err_x));
    row("Y Error (cm)", cell_text(c.neucf, &MetricsBundle::err_y), cell_text(c.poly, &MetricsBundle::err_y));
    row("Path Length (cm)", cell_text(c.neucf, &MetricsBundle::path_length),
        cell_text(c.poly, &MetricsBundle::path_length));
    row("r2", cell_text(c.neucf, &MetricsBundle::r2), cell_text(c.poly, &MetricsBundle::r2));
    row("Acceleration (cm/s^2)", cell_text(c.neucf, &MetricsBundle::accel_mean, &MetricsBundle::accel_std),
        cell_text(c.poly, &MetricsBundle::accel_mean, &MetricsBundle::accel_std));
    row("Jerk (cm/s^3)", cell_text(c.neucf, &MetricsBundle::jerk_mean, &MetricsBundle::jerk_std),
        cell_text(c.poly, &MetricsBundle::jerk_mean, &MetricsBundle::jerk_std));
    row("2nd-derivative variance", cell_text(c.neucf, &MetricsBundle::d2_variance),
        cell_text(c.poly, &MetricsBundle::d2_variance));
    row("Fractal slope", cell_text(c.neucf, &MetricsBundle::fractal_slope),
        cell_text(c.poly, &MetricsBundle::fractal_slope));
    for (const std::string& f : c.failures) out << "FAILED " << f << "\n";
    out << "\n";
  }
  return out.str();
}

}  // namespace neucf
