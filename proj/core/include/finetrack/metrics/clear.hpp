#pragma once

#include <span>

#include "finetrack/mot_record.hpp"

namespace finetrack::metrics {

struct ClearResult {
  double mota = 0.0;
  double idf1 = 0.0;
  int id_switches = 0;
  int false_positives = 0;
  int false_negatives = 0;
  int matches = 0;
  int num_gt = 0;
  int num_hyp = 0;
  int idtp = 0;
};

/// CLEAR-MOT and identity metrics over frame-aligned ground truth and
/// hypotheses. A pair matches when IoU >= `iou_threshold`; correspondences
/// from earlier frames are kept while they still match. Throws
/// std::invalid_argument naming the offending row (1-based, per side) on a
/// degenerate box, a frame below 1 or an id repeated within a frame.
ClearResult clear_metrics(std::span<const MotRecord> gt, std::span<const MotRecord> hyp,
                          double iou_threshold = 0.5);

}  // namespace finetrack::metrics
