#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "neucf/types.hpp"

namespace neucf {

enum class ControllerKind { NeuCF, Poly };

std::string_view to_string(ControllerKind c);
ControllerKind controller_from_string(std::string_view s);

enum class EventAction { Add, Remove, Move };

/// Timed scene change. Beacon ids are implicit: the n-th add creates id n.
struct BeaconEvent {
  double t = 0.0;
  EventAction action = EventAction::Add;
  BeaconColor color = BeaconColor::Orange;  // add only
  Vec2 pos_cm = Vec2::Zero();               // add and move
  int id = -1;                              // remove and move

  static BeaconEvent add(double t, BeaconColor c, const Vec2& pos) { return {t, EventAction::Add, c, pos, -1}; }
  static BeaconEvent remove(double t, int id) { return {t, EventAction::Remove, BeaconColor::Orange, Vec2::Zero(), id}; }
  static BeaconEvent move(double t, int id, const Vec2& pos) { return {t, EventAction::Move, BeaconColor::Orange, pos, id}; }

  bool operator==(const BeaconEvent& o) const;
};

struct ScenarioScript {
  std::string name;
  std::uint64_t seed = 0;
  double time_limit = 36.0;
  ControllerKind controller = ControllerKind::NeuCF;
  double width_cm = 52.0;
  double height_cm = 47.0;
  /// Baseline reach duration when no NeuCF completion time is available.
  std::optional<double> baseline_duration;
  std::vector<BeaconEvent> events;

  bool operator==(const ScenarioScript& o) const;
};

/// Throws ScenarioInvalid on unsorted events, events after the time limit,
/// positions outside the workspace, or ids that do not name a live beacon.
void validate_script(const ScenarioScript& s);

/// Throws ParseError on malformed JSON and ValidationError on any schema or
/// invariant violation, including unknown keys.
ScenarioScript parse_scenario(std::string_view text);
ScenarioScript scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioScript& s);
std::string serialize_scenario(const ScenarioScript& s);

std::vector<ScenarioScript> builtin_scenarios();
/// Looks up a builtin by name; nullopt when unknown.
std::optional<ScenarioScript> builtin_scenario(std::string_view name);

}  // namespace neucf
