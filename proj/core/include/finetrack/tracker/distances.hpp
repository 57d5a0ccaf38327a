#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "finetrack/box.hpp"

namespace finetrack::tracker {

/// Pairwise 1 - IoU, rows are tracks and columns detections.
Eigen::MatrixXd iou_distance(std::span<const Box> track_boxes, std::span<const Box> det_boxes);

/// Pairwise 1 - max(0, cos). Inputs must be unit vectors of equal length.
Eigen::MatrixXd feature_distance(std::span<const Eigen::VectorXd> track_embs,
                                 std::span<const Eigen::VectorXd> det_embs);

struct DistanceMatrices {
  Eigen::MatrixXd d_feat;
  Eigen::MatrixXd d_iou;
  Eigen::MatrixXd d_feat_gated;  // 1 - (1 - d_feat) * [d_iou < 1]
  Eigen::MatrixXd d;             // sqrt(d_feat_gated * d_iou)
};

DistanceMatrices fused_distance(const Eigen::MatrixXd& d_feat, const Eigen::MatrixXd& d_iou);

constexpr double kEmaMomentum = 0.9;

/// momentum * prev + (1 - momentum) * next, renormalized to unit length.
Eigen::VectorXd ema_update(const Eigen::VectorXd& prev, const Eigen::VectorXd& next,
                           double momentum = kEmaMomentum);

}  // namespace finetrack::tracker
