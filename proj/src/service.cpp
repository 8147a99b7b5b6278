#include "neucf/service.hpp"

#include <algorithm>
#include <cmath>

#include "neucf/io.hpp"

namespace neucf {

using nlohmann::json;

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Idle:
      return "idle";
    case Phase::Running:
      return "running";
    case Phase::Finished:
      return "finished";
  }
  return "idle";
}

json CommandReply::to_json() const {
  json j{{"type", ok ? "ack" : "nack"}, {"cmd", cmd}};
  if (!ok) j["reason"] = reason;
  if (id) j["id"] = *id;
  if (!req.is_null()) j["req"] = req;
  return j;
}

SnapshotBuffer::SnapshotBuffer(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

void SnapshotBuffer::push(std::shared_ptr<const std::string> msg) {
  std::lock_guard lock(mu_);
  if (q_.size() == capacity_) {
    q_.pop_front();
    ++dropped_;
  }
  q_.push_back(std::move(msg));
}

std::shared_ptr<const std::string> SnapshotBuffer::pop() {
  std::lock_guard lock(mu_);
  if (q_.empty()) return nullptr;
  auto m = std::move(q_.front());
  q_.pop_front();
  return m;
}

std::size_t SnapshotBuffer::size() const {
  std::lock_guard lock(mu_);
  return q_.size();
}

std::size_t SnapshotBuffer::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

Session::Session(std::string id, ScenarioScript base, SimConfig cfg)
    : id_(std::move(id)), base_(std::move(base)), started_(base_), cfg_(std::move(cfg)) {
  validate_script(base_);
}

Phase Session::phase() const {
  std::lock_guard lock(mu_);
  return phase_;
}

double Session::speed() const {
  std::lock_guard lock(mu_);
  return speed_;
}

long Session::seq() const {
  std::lock_guard lock(mu_);
  return seq_;
}

double Session::time() const {
  std::lock_guard lock(mu_);
  return sim_ ? sim_->time() : 0.0;
}

namespace {

CommandReply nack(const std::string& cmd, const std::string& reason) { return {false, cmd, reason, std::nullopt, {}}; }
CommandReply ack(const std::string& cmd) { return {true, cmd, {}, std::nullopt, {}}; }

std::optional<Vec2> read_pos(const json& cmd) {
  if (!cmd.contains("pos_cm")) return std::nullopt;
  const json& p = cmd.at("pos_cm");
  if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) return std::nullopt;
  return Vec2(p[0].get<double>(), p[1].get<double>());
}

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

CommandReply Session::apply(const json& cmd) {
  if (!cmd.is_object() || !cmd.contains("type") || !cmd.at("type").is_string()) {
    return nack("", "malformed command");
  }
  const std::string type = cmd.at("type").get<std::string>();
  CommandReply r;
  {
    std::lock_guard lock(mu_);
    if (type == "start") {
      r = start(cmd);
    } else if (type == "reset") {
      sim_.reset();
      phase_ = Phase::Idle;
      r = ack(type);
    } else if (type == "set_speed") {
      const json m = cmd.value("multiplier", json());
      if (!m.is_number() || !(m.get<double>() > 0.0) || m.get<double>() > 1000.0) {
        r = nack(type, "invalid multiplier");
      } else {
        speed_ = m.get<double>();
        r = ack(type);
      }
    } else if (type == "add_beacon" || type == "remove_beacon" || type == "move_beacon") {
      r = beacon_command(type, cmd);
    } else {
      r = nack(type, "unknown command");
    }
  }
  if (cmd.contains("req")) r.req = cmd.at("req");
  return r;
}

CommandReply Session::start(const json& cmd) {
  if (phase_ == Phase::Running) return nack("start", "already running");
  if (phase_ == Phase::Finished) return nack("start", "session finished; reset first");
  ScenarioScript script = base_;
  if (cmd.contains("controller")) {
    const json& c = cmd.at("controller");
    if (!c.is_string()) return nack("start", "invalid controller");
    try {
      script.controller = controller_from_string(c.get<std::string>());
    } catch (const Error&) {
      return nack("start", "invalid controller");
    }
  }
  if (cmd.contains("seed")) {
    const json& s = cmd.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long long>() < 0)) {
      return nack("start", "invalid seed");
    }
    script.seed = s.get<std::uint64_t>();
  }
  try {
    sim_ = std::make_unique<Simulation>(script, cfg_);
  } catch (const Error& e) {
    return nack("start", e.what());
  }
  started_ = script;
  phase_ = Phase::Running;
  return ack("start");
}

CommandReply Session::beacon_command(const std::string& type, const json& cmd) {
  if (phase_ != Phase::Running) return nack(type, "not running");
  BeaconEvent e;
  if (type == "add_beacon") {
    const json c = cmd.value("color", json());
    if (!c.is_string()) return nack(type, "invalid color");
    BeaconColor color;
    try {
      color = beacon_color_from_string(c.get<std::string>());
    } catch (const Error&) {
      return nack(type, "invalid color");
    }
    const auto pos = read_pos(cmd);
    if (!pos) return nack(type, "invalid position");
    e = BeaconEvent::add(0.0, color, *pos);
  } else {
    const json id = cmd.value("id", json());
    if (!id.is_number_integer()) return nack(type, "unknown id");
    if (type == "remove_beacon") {
      e = BeaconEvent::remove(0.0, id.get<int>());
    } else {
      const auto pos = read_pos(cmd);
      if (!pos) return nack(type, "invalid position");
      e = BeaconEvent::move(0.0, id.get<int>(), *pos);
    }
  }
  try {
    const int id = sim_->inject(e);
    CommandReply r = ack(type);
    r.id = id;
    return r;
  } catch (const ValidationError& err) {
    return nack(type, err.what());
  }
}

bool Session::tick() {
  std::lock_guard lock(mu_);
  if (phase_ != Phase::Running) return false;
  sim_->step();
  if (sim_->finished()) phase_ = Phase::Finished;
  return true;
}

json Session::snapshot(bool detail) {
  std::lock_guard lock(mu_);
  json j{{"type", "snapshot"}, {"seq", ++seq_}, {"phase", std::string(to_string(phase_))}, {"speed", speed_}};
  if (!sim_) {
    j["t"] = 0.0;
    j["ee"] = {{"p", vec_json(Vec2::Zero())}, {"v", vec_json(Vec2::Zero())}};
    j["beacons"] = json::array();
    j["scene"] = json::array();
    j["desirability"] = json::array();
    j["winner"] = nullptr;
    return j;
  }
  j["t"] = sim_->time();
  j["ee"] = {{"p", vec_json(sim_->plant().p)}, {"v", vec_json(sim_->plant().v)}};
  j["beacons"] = sim_->tracks();
  json scene = json::array();
  for (const WorldBeacon& b : sim_->world()) {
    scene.push_back({{"id", b.id},
                     {"color", std::string(to_string(b.color))},
                     {"pos_cm", vec_json(b.pos_cm)},
                     {"present", b.present}});
  }
  j["scene"] = std::move(scene);
  json field = json::array();
  const FieldVec& u = sim_->field().u;
  for (int i = 0; i < kNeurons; i += detail ? 1 : 2) field.push_back(u[i]);
  j["field"] = std::move(field);
  json des = json::array();
  const Desirability& d = sim_->desirability_now();
  for (int i : d.active) des.push_back(json::array({i, d.d[i]}));
  j["desirability"] = std::move(des);
  j["winner"] = sim_->winner_now() ? json(*sim_->winner_now()) : json(nullptr);
  if (phase_ == Phase::Finished) {
    const RunResult res = summarize_run(*sim_);
    j["status"] = std::string(to_string(res.status));
    j["metrics"] = res.metrics;
  }
  return j;
}

ScenarioScript Session::record() const {
  std::lock_guard lock(mu_);
  if (phase_ != Phase::Finished) throw SessionNotFinished("session " + id_ + " is " + std::string(to_string(phase_)));
  ScenarioScript out = started_;
  const auto& live = sim_->applied_live_events();
  out.events.insert(out.events.end(), live.begin(), live.end());
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const BeaconEvent& a, const BeaconEvent& b) { return a.t < b.t; });
  if (out.name.empty() || out.name.find("recorded") == std::string::npos) out.name += "_recorded";
  return out;
}

TrajectoryLog Session::log() const {
  std::lock_guard lock(mu_);
  return sim_ ? sim_->log() : TrajectoryLog{};
}

LiveSession::LiveSession(std::shared_ptr<Session> session, double publish_hz)
    : session_(std::move(session)),
      publish_period_(std::chrono::nanoseconds(static_cast<long long>(1e9 / publish_hz))),
      worker_([this](std::stop_token st) { run(st); }) {}

LiveSession::~LiveSession() {
  worker_.request_stop();
  wake_.notify_all();
}

std::shared_ptr<LiveSession::Subscriber> LiveSession::subscribe(bool detail, Notify notify) {
  auto sub = std::make_shared<Subscriber>();
  sub->detail = detail;
  sub->notify = std::move(notify);
  std::lock_guard lock(mu_);
  subs_.push_back(sub);
  return sub;
}

void LiveSession::unsubscribe(const std::shared_ptr<Subscriber>& sub) {
  std::lock_guard lock(mu_);
  std::erase(subs_, sub);
}

CommandReply LiveSession::apply(const json& cmd) {
  CommandReply r = session_->apply(cmd);
  {
    std::lock_guard lock(mu_);
    poked_ = true;
  }
  wake_.notify_all();
  return r;
}

void LiveSession::publish() {
  std::vector<std::shared_ptr<Subscriber>> subs;
  {
    std::lock_guard lock(mu_);
    subs = subs_;
  }
  std::shared_ptr<const std::string> coarse, fine;
  for (const auto& s : subs) {
    auto& msg = s->detail ? fine : coarse;
    if (!msg) msg = std::make_shared<const std::string>(session_->snapshot(s->detail).dump());
    s->buffer.push(msg);
    if (s->notify) s->notify();
  }
}

void LiveSession::run(std::stop_token st) {
  using clock = std::chrono::steady_clock;
  const double dt = session_->config().dt;
  auto next_pub = clock::now();
  auto next_tick = clock::now();
  bool was_running = false;
  while (!st.stop_requested()) {
    const auto now = clock::now();
    const bool running = session_->phase() == Phase::Running;
    if (running && !was_running) next_tick = now;
    was_running = running;
    if (running && now >= next_tick) {
      session_->tick();
      next_tick += std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(dt / session_->speed()));
      if (next_tick < now - std::chrono::milliseconds(200)) next_tick = now;
      continue;
    }
    if (now >= next_pub) {
      publish();
      next_pub += publish_period_;
      if (next_pub < now) next_pub = now + publish_period_;
      continue;
    }
    const auto until = running ? std::min(next_tick, next_pub) : next_pub;
    std::unique_lock lock(mu_);
    wake_.wait_until(lock, st, until, [&] { return poked_; });
    poked_ = false;
  }
}

SessionRegistry::SessionRegistry(SimConfig defaults, double publish_hz)
    : defaults_(std::move(defaults)), publish_hz_(publish_hz) {}

std::shared_ptr<LiveSession> SessionRegistry::create(const json& body) {
  if (!body.is_null() && !body.is_object()) throw ValidationError("session body must be a JSON object");
  ScenarioScript script;
  script.name = "live";
  SimConfig cfg = defaults_;
  if (body.is_object()) {
    for (const auto& [key, _] : body.items()) {
      if (key != "scenario" && key != "config") throw ValidationError("session body: unknown key '" + key + "'");
    }
    if (body.contains("scenario")) {
      const json& s = body.at("scenario");
      if (s.is_string()) {
        const std::string name = s.get<std::string>();
        if (name.rfind("builtin:", 0) != 0) throw ValidationError("session scenario must be 'builtin:<name>' or an object");
        script = load_scenario(name);
      } else {
        script = scenario_from_json(s);
      }
    }
    if (body.contains("config")) apply_sim_config(cfg, body.at("config"));
  }
  std::lock_guard lock(mu_);
  const std::string id = "s" + std::to_string(next_++);
  auto live = std::make_shared<LiveSession>(std::make_shared<Session>(id, script, cfg), publish_hz_);
  sessions_[id] = live;
  return live;
}

std::shared_ptr<LiveSession> SessionRegistry::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound("no session '" + id + "'");
  return it->second;
}

std::vector<std::string> SessionRegistry::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

}  // namespace neucf
