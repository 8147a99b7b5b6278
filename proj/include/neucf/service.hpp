#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "neucf/scenario.hpp"
#include "neucf/sim.hpp"

namespace neucf {

enum class Phase { Idle, Running, Finished };
std::string_view to_string(Phase p);

struct CommandReply {
  bool ok = false;
  std::string cmd;
  std::string reason;        // nack only
  std::optional<int> id;     // beacon id for add_beacon acks
  nlohmann::json req;        // client correlation token echoed back, when given

  nlohmann::json to_json() const;
};

/// Fixed-capacity queue that drops the oldest entry when full.
class SnapshotBuffer {
 public:
  explicit SnapshotBuffer(std::size_t capacity = 8);

  void push(std::shared_ptr<const std::string> msg);
  std::shared_ptr<const std::string> pop();
  std::size_t size() const;
  std::size_t dropped() const;

 private:
  mutable std::mutex mu_;
  std::size_t capacity_;
  std::deque<std::shared_ptr<const std::string>> q_;
  std::size_t dropped_ = 0;
};

/// Interactive simulation driven by client commands. Thread-safe; every public
/// member serializes on one mutex so commands land between ticks.
class Session {
 public:
  Session(std::string id, ScenarioScript base, SimConfig cfg);

  const std::string& id() const { return id_; }
  Phase phase() const;
  double speed() const;
  long seq() const;
  /// Sim time, or 0 when idle.
  double time() const;

  /// Commands: start{controller,seed}, reset, add_beacon{color,pos_cm},
  /// remove_beacon{id}, move_beacon{id,pos_cm}, set_speed{multiplier}.
  CommandReply apply(const nlohmann::json& cmd);

  /// Advances one control tick when running. Returns false otherwise.
  bool tick();

  /// Next wire snapshot; the sequence number increases by one per call.
  nlohmann::json snapshot(bool detail = false);

  /// Base events merged with the live events at their applied tick times.
  /// Throws SessionNotFinished.
  ScenarioScript record() const;

  /// Copy of the trajectory so far; empty when idle.
  TrajectoryLog log() const;

  const SimConfig& config() const { return cfg_; }

 private:
  CommandReply start(const nlohmann::json& cmd);
  CommandReply beacon_command(const std::string& type, const nlohmann::json& cmd);

  mutable std::mutex mu_;
  std::string id_;
  ScenarioScript base_;
  ScenarioScript started_;
  SimConfig cfg_;
  Phase phase_ = Phase::Idle;
  std::unique_ptr<Simulation> sim_;
  double speed_ = 1.0;
  long seq_ = 0;
};

/// Wall-clock pacing for a session: one worker advances ticks at dt / speed
/// and publishes snapshots to subscribers at a fixed wall rate.
class LiveSession {
 public:
  using Notify = std::function<void()>;

  struct Subscriber {
    bool detail = false;
    SnapshotBuffer buffer;
    Notify notify;
  };

  explicit LiveSession(std::shared_ptr<Session> session, double publish_hz = 20.0);
  ~LiveSession();
  LiveSession(const LiveSession&) = delete;
  LiveSession& operator=(const LiveSession&) = delete;

  Session& session() { return *session_; }
  std::shared_ptr<Subscriber> subscribe(bool detail, Notify notify);
  void unsubscribe(const std::shared_ptr<Subscriber>& sub);
  /// Applies a command and wakes the worker so pacing changes take effect.
  CommandReply apply(const nlohmann::json& cmd);

 private:
  void run(std::stop_token st);
  void publish();

  std::shared_ptr<Session> session_;
  std::chrono::nanoseconds publish_period_;
  std::mutex mu_;
  std::condition_variable_any wake_;
  bool poked_ = false;
  std::vector<std::shared_ptr<Subscriber>> subs_;
  std::jthread worker_;
};

class SessionRegistry {
 public:
  explicit SessionRegistry(SimConfig defaults = {}, double publish_hz = 20.0);

  /// Body: {} or {"scenario": "builtin:<name>" | script object, "config": {...}}.
  /// Without a scenario the session starts from an empty 52x47 cm workspace.
  std::shared_ptr<LiveSession> create(const nlohmann::json& body);
  /// Throws SessionNotFound.
  std::shared_ptr<LiveSession> get(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  mutable std::mutex mu_;
  SimConfig defaults_;
  double publish_hz_;
  long next_ = 1;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions_;
};

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  /// Directory served for GET requests outside the API, when set.
  std::optional<std::string> static_dir;
};

/// Blocks serving HTTP and WebSocket clients until `stop` is requested or the
/// process is interrupted. `on_ready` receives the bound port.
void serve(const ServerOptions& opts, SessionRegistry& registry,
           const std::function<void(unsigned short)>& on_ready = {}, std::stop_token stop = {});

}  // namespace neucf
