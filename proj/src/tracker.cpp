#include "neucf/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <nlohmann/json.hpp>

namespace neucf {

std::string_view to_string(Visibility v) {
  switch (v) {
    case Visibility::Stationary:
      return "stationary";
    case Visibility::Moving:
      return "moving";
    case Visibility::Disappeared:
      return "disappeared";
  }
  return "stationary";
}

Visibility visibility_from_string(std::string_view s) {
  if (s == "stationary") return Visibility::Stationary;
  if (s == "moving") return Visibility::Moving;
  if (s == "disappeared") return Visibility::Disappeared;
  throw ValidationError("unknown visibility '" + std::string(s) + "'");
}

Detection make_detection(BeaconColor color, const Vec2& pos_image, const WorkspaceCalib& calib) {
  return {color, pos_image, pixel_to_world(calib, pos_image)};
}

BeaconTrack update_track(const BeaconTrack& track, const std::optional<Detection>& detection,
                         double now, const TrackerConfig& cfg) {
  if (now < track.t_vis) {
    throw ClockRegression("track " + std::to_string(track.id) + ": time " + std::to_string(now) +
                          " precedes last detection at " + std::to_string(track.t_vis));
  }
  BeaconTrack out = track;
  if (detection) {
    const Vec2 d = detection->pos_image - track.pos_image;
    const bool moved = std::abs(d.x()) > cfg.move_fraction * cfg.calib.x_max ||
                       std::abs(d.y()) > cfg.move_fraction * cfg.calib.y_max;
    out.visibility = moved ? Visibility::Moving : Visibility::Stationary;
    out.pos_image = detection->pos_image;
    out.pos_real = detection->pos_real;
    out.t_vis = now;
  } else if (now - track.t_vis > cfg.disappear_after_s) {
    out.visibility = Visibility::Disappeared;
  }
  return out;
}

Assignment associate(const std::vector<BeaconTrack>& tracks, const std::vector<Detection>& detections,
                     const TrackerConfig& cfg) {
  const double gate = cfg.gate_fraction * std::hypot(cfg.calib.x_max, cfg.calib.y_max);

  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t k = 0; k < detections.size(); ++k) {
      if (tracks[i].color != detections[k].color) continue;
      const double dist = (tracks[i].pos_image - detections[k].pos_image).norm();
      if (dist <= gate) pairs.emplace_back(dist, i, k);
    }
  }
  std::sort(pairs.begin(), pairs.end());

  std::vector<bool> track_used(tracks.size(), false), det_used(detections.size(), false);
  Assignment a;
  for (const auto& [dist, i, k] : pairs) {
    if (track_used[i] || det_used[k]) continue;
    track_used[i] = det_used[k] = true;
    a.matches.push_back({i, k});
  }
  std::sort(a.matches.begin(), a.matches.end(),
            [](const auto& x, const auto& y) { return x.track < y.track; });
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (!track_used[i]) a.unmatched_tracks.push_back(i);
  }
  for (std::size_t k = 0; k < detections.size(); ++k) {
    if (!det_used[k]) a.unmatched_detections.push_back(k);
  }
  return a;
}

BeaconTracker::BeaconTracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.calib.validate(); }

void BeaconTracker::update(double now, const std::vector<Detection>& detections) {
  if (now < last_now_) {
    throw ClockRegression("tracker update at " + std::to_string(now) + " after " +
                          std::to_string(last_now_));
  }
  last_now_ = now;

  const Assignment a = associate(tracks_, detections, cfg_);
  for (const auto& m : a.matches) {
    tracks_[m.track] = update_track(tracks_[m.track], detections[m.detection], now, cfg_);
  }
  for (std::size_t i : a.unmatched_tracks) {
    tracks_[i] = update_track(tracks_[i], std::nullopt, now, cfg_);
  }
  for (std::size_t k : a.unmatched_detections) {
    const Detection& d = detections[k];
    tracks_.push_back({next_id_++, d.color, Visibility::Stationary, d.pos_image, d.pos_real, now});
  }

  const double horizon = cfg_.disappear_after_s + cfg_.gc_after_s;
  std::erase_if(tracks_, [&](const BeaconTrack& t) { return t.disappeared() && now - t.t_vis > horizon; });
}

void to_json(nlohmann::json& j, const BeaconTrack& t) {
  j = nlohmann::json{{"id", t.id},
                     {"color", to_string(t.color)},
                     {"visibility", to_string(t.visibility)},
                     {"pos_image", {t.pos_image.x(), t.pos_image.y()}},
                     {"pos_real", {t.pos_real.x(), t.pos_real.y()}},
                     {"t_vis", t.t_vis}};
}

}  // namespace neucf
