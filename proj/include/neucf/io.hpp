#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "neucf/metrics.hpp"
#include "neucf/scenario.hpp"
#include "neucf/sim.hpp"

namespace neucf {

inline constexpr std::string_view kVersion = "0.1.0";

/// Raised when an input file named on the command line does not exist.
class MissingFile : public Error {
 public:
  explicit MissingFile(const std::string& what) : Error("MissingFile", what) {}
};

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);
void write_field_csv(std::ostream& out, const TrajectoryLog& log);

nlohmann::json sim_config_to_json(const SimConfig& c);
/// Overrides the fields present in `j`. Throws ValidationError on unknown keys
/// or wrongly typed values.
void apply_sim_config(SimConfig& c, const nlohmann::json& j);

/// `builtin:<name>` or a path to a scenario file. Throws MissingFile, ParseError, ValidationError.
ScenarioScript load_scenario(const std::string& spec);

std::string read_text_file(const std::filesystem::path& path);

struct RunConfig {
  std::optional<std::string> scenario;
  std::optional<ControllerKind> controller;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = "neucf_out";
  int repeats = 1;
  std::optional<double> dt;
  bool vision_mode = false;
  /// JSON document: either a run_meta.json or {"scenario": ..., "config": ...}.
  std::optional<std::filesystem::path> config_path;
};

/// Script and simulator configuration after applying the config file and flags.
struct ResolvedRun {
  ScenarioScript script;
  SimConfig sim;
};

ResolvedRun resolve_run(const RunConfig& cfg);

nlohmann::json run_meta(const ResolvedRun& run, const RunResult& result);

/// Writes trajectory.csv, field_history.csv, metrics.json and run_meta.json.
void write_run_artifacts(const std::filesystem::path& dir, const ResolvedRun& run, const RunResult& result);

/// Exit codes: 0 success, 1 module error, 2 usage error or missing input file.
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct CompareCell {
  std::string scenario;
  std::vector<std::uint64_t> seeds;
  std::optional<MetricsBundle> neucf;
  std::optional<MetricsBundle> poly;
  std::vector<std::string> failures;
};

struct CompareReport {
  std::vector<CompareCell> cells;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Runs both controllers on every scenario for seeds seed .. seed+repeats-1.
/// The baseline duration of each poly run is the completion time of the
/// matching NeuCF run. Failing cells are recorded and skipped.
CompareReport cmd_compare(const std::vector<ScenarioScript>& scenarios, std::uint64_t seed, int repeats,
                          const SimConfig& sim);

}  // namespace neucf
