#include "finetrack/tracker/byte_tracker.hpp"

#include <algorithm>
#include <stdexcept>

#include "finetrack/tracker/distances.hpp"
#include "finetrack/tracker/hungarian.hpp"

namespace finetrack::tracker {

namespace {

std::vector<Box> boxes_of(const std::vector<Track*>& tracks) {
  std::vector<Box> out;
  for (const Track* t : tracks) out.push_back(t->box());
  return out;
}

std::vector<Box> boxes_of(std::span<const Detection> dets, const std::vector<int>& idx) {
  std::vector<Box> out;
  for (int i : idx) out.push_back(dets[i].box);
  return out;
}

}  // namespace

ByteTracker::ByteTracker(TrackerConfig config) : cfg_(config) {
  if (cfg_.low_threshold > cfg_.high_threshold) throw std::invalid_argument("tracker: low threshold above high");
  if (cfg_.min_hits < 1 || cfg_.max_age < 0) throw std::invalid_argument("tracker: invalid track lifecycle");
}

void ByteTracker::update_track(Track& t, const Detection& det) const {
  kalman_update(t.kalman, det.box, cfg_.kalman);
  if (det.embedding.size() > 0) {
    t.embedding = t.embedding.size() == 0 ? det.embedding : ema_update(t.embedding, det.embedding, cfg_.ema_momentum);
  }
  t.frames_since_update = 0;
  t.score = det.confidence;
  ++t.hits;
}

std::vector<TrackOutput> ByteTracker::step(std::span<const Detection> dets) {
  ++frame_;
  std::vector<int> high, low;
  for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
    if (!dets[i].box.valid()) throw std::invalid_argument("tracker: degenerate detection box");
    if (dets[i].confidence >= cfg_.high_threshold) {
      if (cfg_.use_appearance && dets[i].embedding.size() == 0) {
        throw std::invalid_argument("tracker: high-score detection without an embedding");
      }
      high.push_back(i);
    } else if (dets[i].confidence >= cfg_.low_threshold) {
      low.push_back(i);
    }
  }

  for (Track& t : tracks_) {
    kalman_predict(t.kalman, cfg_.kalman);
    ++t.frames_since_update;
  }

  std::vector<Track*> pool, tentative;
  for (Track& t : tracks_) (t.status == TrackStatus::kTentative ? tentative : pool).push_back(&t);

  // First association: confirmed and lost tracks against high-score detections.
  Eigen::MatrixXd cost = iou_distance(boxes_of(pool), boxes_of(dets, high));
  if (cfg_.use_appearance && !pool.empty() && !high.empty()) {
    std::vector<Eigen::VectorXd> track_embs, det_embs;
    for (const Track* t : pool) track_embs.push_back(t->embedding);
    for (int i : high) det_embs.push_back(dets[i].embedding);
    cost = fused_distance(feature_distance(track_embs, det_embs), cost).d;
  }
  const Assignment first = hungarian_assign(cost, cfg_.match_threshold);
  for (const auto& [r, c] : first.matches) {
    update_track(*pool[r], dets[high[c]]);
    pool[r]->status = TrackStatus::kConfirmed;
  }
  std::vector<int> high_left;
  for (int c : first.unmatched_cols) high_left.push_back(high[c]);

  // Second association: still-tracked leftovers against low-score detections, IoU only.
  std::vector<Track*> remaining;
  for (int r : first.unmatched_rows)
    if (pool[r]->status == TrackStatus::kConfirmed) remaining.push_back(pool[r]);
  const Assignment second =
      hungarian_assign(iou_distance(boxes_of(remaining), boxes_of(dets, low)), cfg_.low_match_threshold);
  for (const auto& [r, c] : second.matches) update_track(*remaining[r], dets[low[c]]);
  for (int r : second.unmatched_rows) remaining[r]->status = TrackStatus::kLost;

  // Tentative tracks against the leftover high-score detections, IoU only.
  const Assignment third =
      hungarian_assign(iou_distance(boxes_of(tentative), boxes_of(dets, high_left)), cfg_.tentative_match_threshold);
  for (const auto& [r, c] : third.matches) {
    Track& t = *tentative[r];
    update_track(t, dets[high_left[c]]);
    if (t.hits >= cfg_.min_hits) t.status = TrackStatus::kConfirmed;
  }

  std::erase_if(tracks_, [&](const Track& t) {
    if (t.status == TrackStatus::kTentative && t.frames_since_update > 0) return true;
    return t.status == TrackStatus::kLost && t.frames_since_update > cfg_.max_age;
  });

  for (int c : third.unmatched_cols) {
    const Detection& det = dets[high_left[c]];
    Track t;
    t.id = next_id_++;
    t.kalman = kalman_initiate(det.box, cfg_.kalman);
    if (det.embedding.size() > 0) t.embedding = det.embedding;
    t.hits = 1;
    t.score = det.confidence;
    t.status = (frame_ == 1 && cfg_.activate_first_frame) || cfg_.min_hits <= 1 ? TrackStatus::kConfirmed
                                                                                 : TrackStatus::kTentative;
    tracks_.push_back(std::move(t));
  }

  std::vector<TrackOutput> out;
  for (const Track& t : tracks_) {
    if (t.status == TrackStatus::kConfirmed && t.frames_since_update == 0) out.push_back({t.id, t.box(), t.score});
  }
  return out;
}

}  // namespace finetrack::tracker
