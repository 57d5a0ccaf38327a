#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "finetrack/tracker/kalman.hpp"

namespace finetrack::tracker {

enum class TrackStatus { kTentative, kConfirmed, kLost };

struct Track {
  int id = 0;
  KalmanState kalman;
  Eigen::VectorXd embedding;  // unit norm; empty for appearance-free tracking
  TrackStatus status = TrackStatus::kTentative;
  int frames_since_update = 0;
  int hits = 0;
  double score = 0.0;
  Box box() const { return state_box(kalman); }
};

struct Detection {
  Box box;
  double confidence = 1.0;
  Eigen::VectorXd embedding;  // required for high-score detections when appearance is used
};

struct TrackerConfig {
  double high_threshold = 0.6;
  double low_threshold = 0.1;
  double match_threshold = 0.5;
  double low_match_threshold = 0.5;
  double tentative_match_threshold = 0.7;  // on IoU distance
  double ema_momentum = 0.9;
  int max_age = 30;
  int min_hits = 2;
  /// False gives the IoU-only ablation of the first association.
  bool use_appearance = true;
  /// Tracks born in the first frame start confirmed.
  bool activate_first_frame = true;
  KalmanParams kalman;
};

struct TrackOutput {
  int id = 0;
  Box box;
  double score = 0.0;
};

/// Two-stage BYTE association with Kalman motion and EMA appearance.
class ByteTracker {
 public:
  explicit ByteTracker(TrackerConfig config = {});

  /// Advances one frame; returns the confirmed tracks updated in it.
  std::vector<TrackOutput> step(std::span<const Detection> detections);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }
  int frame() const { return frame_; }

 private:
  void update_track(Track& track, const Detection& det) const;

  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  int frame_ = 0;
};

inline std::vector<TrackOutput> byte_step(ByteTracker& tracker, std::span<const Detection> detections) {
  return tracker.step(detections);
}

}  // namespace finetrack::tracker
