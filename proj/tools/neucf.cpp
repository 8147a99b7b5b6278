#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "neucf/io.hpp"
#include "neucf/service.hpp"

namespace {

using namespace neucf;

void init_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("NEUCF_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

/// Applies only the "config" section of a config file; used by compare and serve.
SimConfig sim_config_from_file(const std::optional<std::string>& path) {
  SimConfig sim;
  if (!path) return sim;
  const nlohmann::json j = nlohmann::json::parse(read_text_file(*path));
  if (j.contains("config")) apply_sim_config(sim, j.at("config"));
  return sim;
}

int run_main(RunConfig cfg) {
  if (cfg.repeats < 1) {
    std::cerr << "error: --repeats must be at least 1\n";
    return 2;
  }
  if (cfg.repeats == 1) return cmd_run(cfg, std::cout, std::cerr);
  const std::uint64_t first = cfg.seed.value_or(0);
  const std::filesystem::path root = cfg.out_dir;
  int worst = 0;
  for (int r = 0; r < cfg.repeats; ++r) {
    RunConfig one = cfg;
    one.seed = first + static_cast<std::uint64_t>(r);
    one.out_dir = root / ("seed_" + std::to_string(*one.seed));
    worst = std::max(worst, cmd_run(one, std::cout, std::cerr));
  }
  return worst;
}

int compare_main(const std::vector<std::string>& specs, std::uint64_t seed, int repeats,
                 const std::optional<std::string>& out, const std::optional<double>& dt, bool vision,
                 const std::optional<std::string>& config) {
  std::vector<ScenarioScript> scripts;
  if (specs.empty()) {
    scripts = builtin_scenarios();
  } else {
    for (const std::string& s : specs) scripts.push_back(load_scenario(s));
  }
  SimConfig sim = sim_config_from_file(config);
  if (dt) sim.dt = *dt;
  if (vision) sim.vision_mode = true;
  const CompareReport report = cmd_compare(scripts, seed, repeats, sim);
  const std::string text = report.to_text();
  std::cout << text;
  if (out) {
    std::filesystem::create_directories(*out);
    std::ofstream(std::filesystem::path(*out) / "compare.txt") << text;
    std::ofstream(std::filesystem::path(*out) / "compare.json") << report.to_json().dump(2) << "\n";
  }
  for (const CompareCell& c : report.cells) {
    if (!c.failures.empty()) return 1;
  }
  return 0;
}

int serve_main(const ServerOptions& opts, const std::optional<std::string>& config) {
  SessionRegistry registry(sim_config_from_file(config));
  serve(opts, registry, [&](unsigned short port) {
    spdlog::info("listening on {}:{}", opts.address, port);
    std::cout << "neucf serve: http://" << opts.address << ":" << port << std::endl;
  });
  return 0;
}

int scenarios_main(bool as_json) {
  if (as_json) {
    nlohmann::json list = nlohmann::json::array();
    for (const ScenarioScript& s : builtin_scenarios()) list.push_back(scenario_to_json(s));
    std::cout << list.dump(2) << "\n";
    return 0;
  }
  for (const ScenarioScript& s : builtin_scenarios()) {
    std::cout << "builtin:" << s.name << "  (" << s.events.size() << " events, limit " << format_double(s.time_limit)
              << " s)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"NeuCF 2D reaching simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunConfig run_cfg;
  std::optional<std::string> run_config;
  std::optional<std::string> controller;
  std::optional<std::uint64_t> run_seed;
  std::string out_dir = "neucf_out";
  auto* run = app.add_subcommand("run", "Run one scenario and write trajectory, field and metrics artifacts");
  run->add_option("--scenario", run_cfg.scenario, "builtin:<name> or a scenario JSON file");
  run->add_option("--controller", controller, "neucf or poly")->check(CLI::IsMember({"neucf", "poly"}));
  run->add_option("--seed", run_seed, "Noise seed (default: the scenario's seed)");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--repeats", run_cfg.repeats, "Consecutive seeds to run, one subdirectory each")
      ->capture_default_str();
  run->add_option("--dt", run_cfg.dt, "Control tick in seconds")->check(CLI::PositiveNumber);
  run->add_flag("--vision-mode", run_cfg.vision_mode, "Render, segment and track synthetic frames");
  run->add_option("--config", run_config, "run_meta.json or {\"scenario\", \"config\"} document");

  std::vector<std::string> cmp_specs;
  std::uint64_t cmp_seed = 0;
  int cmp_repeats = 3;
  std::optional<std::string> cmp_out, cmp_config;
  std::optional<double> cmp_dt;
  bool cmp_vision = false;
  auto* compare = app.add_subcommand("compare", "Run both controllers and print comparison tables");
  compare->add_option("--scenario", cmp_specs, "Scenarios to compare (default: all builtins)");
  compare->add_option("--seed", cmp_seed, "First seed")->capture_default_str();
  compare->add_option("--repeats", cmp_repeats, "Seeds per scenario")->capture_default_str()->check(
      CLI::PositiveNumber);
  compare->add_option("--out", cmp_out, "Directory for compare.txt and compare.json");
  compare->add_option("--dt", cmp_dt, "Control tick in seconds")->check(CLI::PositiveNumber);
  compare->add_flag("--vision-mode", cmp_vision, "Render, segment and track synthetic frames");
  compare->add_option("--config", cmp_config, "Document whose \"config\" section overrides the defaults");

  ServerOptions srv;
  std::optional<std::string> srv_static, srv_config;
  auto* serve_cmd = app.add_subcommand("serve", "Serve live sessions over HTTP and WebSocket");
  serve_cmd->add_option("--port", srv.port, "TCP port (0 picks a free one)")->capture_default_str();
  serve_cmd->add_option("--address", srv.address, "Bind address")->capture_default_str();
  serve_cmd->add_option("--static", srv_static, "Directory with the operator panel bundle");
  serve_cmd->add_option("--config", srv_config, "Document whose \"config\" section overrides the defaults");

  bool list_json = false;
  auto* scenarios = app.add_subcommand("scenarios", "List builtin scenarios");
  scenarios->add_flag("--json", list_json, "Print full scenario documents");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) {
      if (controller) run_cfg.controller = controller_from_string(*controller);
      run_cfg.seed = run_seed;
      run_cfg.out_dir = out_dir;
      if (run_config) run_cfg.config_path = *run_config;
      return run_main(run_cfg);
    }
    if (*compare) return compare_main(cmp_specs, cmp_seed, cmp_repeats, cmp_out, cmp_dt, cmp_vision, cmp_config);
    if (*serve_cmd) {
      srv.static_dir = srv_static;
      return serve_main(srv, srv_config);
    }
    if (*scenarios) return scenarios_main(list_json);
  } catch (const MissingFile& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
