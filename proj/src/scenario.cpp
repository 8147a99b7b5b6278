#include "neucf/scenario.hpp"

#include <cmath>
#include <initializer_list>
#include <set>

#include <nlohmann/json.hpp>

namespace neucf {

using nlohmann::json;

std::string_view to_string(ControllerKind c) { return c == ControllerKind::NeuCF ? "neucf" : "poly"; }

ControllerKind controller_from_string(std::string_view s) {
  if (s == "neucf") return ControllerKind::NeuCF;
  if (s == "poly") return ControllerKind::Poly;
  throw ValidationError("unknown controller '" + std::string(s) + "' (expected neucf or poly)");
}

bool BeaconEvent::operator==(const BeaconEvent& o) const {
  if (t != o.t || action != o.action) return false;
  switch (action) {
    case EventAction::Add:
      return color == o.color && pos_cm == o.pos_cm;
    case EventAction::Remove:
      return id == o.id;
    case EventAction::Move:
      return id == o.id && pos_cm == o.pos_cm;
  }
  return false;
}

bool ScenarioScript::operator==(const ScenarioScript& o) const {
  return name == o.name && seed == o.seed && time_limit == o.time_limit && controller == o.controller &&
         width_cm == o.width_cm && height_cm == o.height_cm && baseline_duration == o.baseline_duration &&
         events == o.events;
}

void validate_script(const ScenarioScript& s) {
  auto fail = [&](const std::string& m) { throw ScenarioInvalid("scenario '" + s.name + "': " + m); };
  if (!(s.time_limit > 0.0) || !std::isfinite(s.time_limit)) fail("time_limit must be positive");
  if (!(s.width_cm > 0.0) || !(s.height_cm > 0.0)) fail("workspace extents must be positive");
  if (s.baseline_duration && !(*s.baseline_duration > 0.0)) fail("baseline_duration must be positive");

  auto inside = [&](const Vec2& p) {
    return p.allFinite() && p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= s.width_cm && p.y() <= s.height_cm;
  };
  std::set<int> live;
  int next_id = 0;
  double prev_t = 0.0;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const BeaconEvent& e = s.events[i];
    const std::string where = "event " + std::to_string(i);
    if (!std::isfinite(e.t) || e.t < 0.0) fail(where + " has a negative time");
    if (e.t < prev_t) fail(where + " is out of time order");
    if (e.t > s.time_limit) fail(where + " occurs after the time limit");
    prev_t = e.t;
    switch (e.action) {
      case EventAction::Add:
        if (!inside(e.pos_cm)) fail(where + " places a beacon outside the workspace");
        live.insert(next_id++);
        break;
      case EventAction::Remove:
        if (!live.erase(e.id)) fail(where + " removes unknown id " + std::to_string(e.id));
        break;
      case EventAction::Move:
        if (!live.count(e.id)) fail(where + " moves unknown id " + std::to_string(e.id));
        if (!inside(e.pos_cm)) fail(where + " moves a beacon outside the workspace");
        break;
    }
  }
}

namespace {

void require_keys(const json& j, const std::string& what, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(what + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError(what + ": unknown key '" + key + "'");
  }
}

double num(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw ValidationError(what + ": missing '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw ValidationError(what + ": '" + key + "' must be a number");
  return v.get<double>();
}

Vec2 point(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw ValidationError(what + ": missing '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ValidationError(what + ": '" + key + "' must be [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

int integer(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw ValidationError(what + ": missing '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ValidationError(what + ": '" + key + "' must be an integer");
  return v.get<int>();
}

std::string str(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw ValidationError(what + ": missing '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_string()) throw ValidationError(what + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

BeaconEvent event_from_json(const json& j, std::size_t i) {
  const std::string what = "event " + std::to_string(i);
  if (!j.is_object()) throw ValidationError(what + " must be a JSON object");
  const std::string action = str(j, "action", what);
  BeaconEvent e;
  if (action == "add_beacon") {
    require_keys(j, what, {"t", "action", "color", "pos_cm"});
    e = BeaconEvent::add(num(j, "t", what), beacon_color_from_string(str(j, "color", what)), point(j, "pos_cm", what));
  } else if (action == "remove_beacon") {
    require_keys(j, what, {"t", "action", "id"});
    e = BeaconEvent::remove(num(j, "t", what), integer(j, "id", what));
  } else if (action == "move_beacon") {
    require_keys(j, what, {"t", "action", "id", "pos_cm"});
    e = BeaconEvent::move(num(j, "t", what), integer(j, "id", what), point(j, "pos_cm", what));
  } else {
    throw ValidationError(what + ": unknown action '" + action + "'");
  }
  return e;
}

json event_to_json(const BeaconEvent& e) {
  switch (e.action) {
    case EventAction::Add:
      return {{"t", e.t}, {"action", "add_beacon"}, {"color", std::string(to_string(e.color))},
              {"pos_cm", {e.pos_cm.x(), e.pos_cm.y()}}};
    case EventAction::Remove:
      return {{"t", e.t}, {"action", "remove_beacon"}, {"id", e.id}};
    case EventAction::Move:
      return {{"t", e.t}, {"action", "move_beacon"}, {"id", e.id}, {"pos_cm", {e.pos_cm.x(), e.pos_cm.y()}}};
  }
  return {};
}

}  // namespace

ScenarioScript scenario_from_json(const json& j) {
  const std::string what = "scenario";
  require_keys(j, what, {"name", "seed", "time_limit", "controller", "workspace", "baseline_duration", "events"});
  ScenarioScript s;
  s.name = str(j, "name", what);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0)) {
      throw ValidationError("scenario: 'seed' must be a non-negative integer");
    }
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("time_limit")) s.time_limit = num(j, "time_limit", what);
  if (j.contains("controller")) s.controller = controller_from_string(str(j, "controller", what));
  if (j.contains("workspace")) {
    const json& w = j.at("workspace");
    require_keys(w, "workspace", {"width_cm", "height_cm"});
    s.width_cm = num(w, "width_cm", "workspace");
    s.height_cm = num(w, "height_cm", "workspace");
  }
  if (j.contains("baseline_duration")) s.baseline_duration = num(j, "baseline_duration", what);
  if (j.contains("events")) {
    const json& ev = j.at("events");
    if (!ev.is_array()) throw ValidationError("scenario: 'events' must be an array");
    for (std::size_t i = 0; i < ev.size(); ++i) s.events.push_back(event_from_json(ev[i], i));
  }
  try {
    validate_script(s);
  } catch (const ScenarioInvalid& e) {
    throw ValidationError(e.what());
  }
  return s;
}

ScenarioScript parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scenario JSON: ") + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
}

json scenario_to_json(const ScenarioScript& s) {
  json events = json::array();
  for (const BeaconEvent& e : s.events) events.push_back(event_to_json(e));
  json j{{"name", s.name},
         {"seed", s.seed},
         {"time_limit", s.time_limit},
         {"controller", std::string(to_string(s.controller))},
         {"workspace", {{"width_cm", s.width_cm}, {"height_cm", s.height_cm}}},
         {"events", std::move(events)}};
  if (s.baseline_duration) j["baseline_duration"] = *s.baseline_duration;
  return j;
}

std::string serialize_scenario(const ScenarioScript& s) { return scenario_to_json(s).dump(2); }

std::vector<ScenarioScript> builtin_scenarios() {
  const auto orange = BeaconColor::Orange;
  const auto green = BeaconColor::Green;
  auto make = [](std::string name, std::vector<BeaconEvent> events) {
    ScenarioScript s;
    s.name = std::move(name);
    s.events = std::move(events);
    return s;
  };
  return {
      make("static_1", {BeaconEvent::add(0.0, orange, {27.0, 35.0})}),
      make("static_2", {BeaconEvent::add(0.0, orange, {27.0, 35.0}), BeaconEvent::add(0.0, orange, {46.0, 30.0})}),
      make("stop", {BeaconEvent::add(1.0, orange, {20.0, 20.0}), BeaconEvent::add(2.0, green, {45.0, 8.0})}),
      make("switch_1", {BeaconEvent::add(0.0, orange, {12.0, 40.0}), BeaconEvent::remove(2.0, 0),
                        BeaconEvent::add(2.0, orange, {40.0, 44.0})}),
      make("switch_2", {BeaconEvent::add(0.0, orange, {12.0, 36.0}), BeaconEvent::add(0.0, orange, {40.0, 46.0}),
                        BeaconEvent::remove(2.0, 0)}),
  };
}

std::optional<ScenarioScript> builtin_scenario(std::string_view name) {
  for (ScenarioScript& s : builtin_scenarios()) {
    if (s.name == name) return std::move(s);
  }
  return std::nullopt;
}

}  // namespace neucf
