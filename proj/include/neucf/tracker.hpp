#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "neucf/geometry.hpp"
#include "neucf/types.hpp"

namespace neucf {

enum class Visibility { Stationary, Moving, Disappeared };

std::string_view to_string(Visibility v);
Visibility visibility_from_string(std::string_view s);

struct TrackerConfig {
  WorkspaceCalib calib;
  double disappear_after_s = 3.0;
  /// Displacement fraction of x'_max / y'_max that marks a track as moving.
  double move_fraction = 0.05;
  /// Association gate as a fraction of the orthographic-frame diagonal.
  double gate_fraction = 0.2;
  /// Disappeared tracks are dropped this long after they disappeared.
  double gc_after_s = 10.0;
};

/// One observed beacon, already mapped into the orthographic frame and the world.
struct Detection {
  BeaconColor color = BeaconColor::Orange;
  Vec2 pos_image = Vec2::Zero();
  Vec2 pos_real = Vec2::Zero();
};

Detection make_detection(BeaconColor color, const Vec2& pos_image, const WorkspaceCalib& calib);

struct BeaconTrack {
  int id = 0;
  BeaconColor color = BeaconColor::Orange;
  Visibility visibility = Visibility::Stationary;
  Vec2 pos_image = Vec2::Zero();
  Vec2 pos_real = Vec2::Zero();
  double t_vis = 0.0;

  bool disappeared() const { return visibility == Visibility::Disappeared; }
};

/// Advances one track by one frame. Throws ClockRegression when now < t_vis.
BeaconTrack update_track(const BeaconTrack& track, const std::optional<Detection>& detection,
                         double now, const TrackerConfig& cfg);

struct Assignment {
  struct Match {
    std::size_t track;
    std::size_t detection;
  };
  std::vector<Match> matches;
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

/// Greedy nearest-neighbour matching within a colour class, shortest pairs
/// first, gated at `cfg.gate_fraction` of the frame diagonal. Indices refer to
/// the input vectors and each list is sorted ascending.
Assignment associate(const std::vector<BeaconTrack>& tracks, const std::vector<Detection>& detections,
                     const TrackerConfig& cfg);

/// Owns the track list for one run.
class BeaconTracker {
 public:
  explicit BeaconTracker(TrackerConfig cfg = {});

  /// Processes one camera frame taken at `now`.
  void update(double now, const std::vector<Detection>& detections);

  const std::vector<BeaconTrack>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }
  double last_update() const { return last_now_; }

 private:
  TrackerConfig cfg_;
  std::vector<BeaconTrack> tracks_;
  int next_id_ = 0;
  double last_now_ = -1.0;
};

void to_json(nlohmann::json& j, const BeaconTrack& t);

}  // namespace neucf
