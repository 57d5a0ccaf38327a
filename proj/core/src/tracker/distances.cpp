#include "finetrack/tracker/distances.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace finetrack::tracker {

Eigen::MatrixXd iou_distance(std::span<const Box> tracks, std::span<const Box> dets) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(tracks.size()), static_cast<Eigen::Index>(dets.size()));
  for (std::size_t i = 0; i < tracks.size(); ++i)
    for (std::size_t j = 0; j < dets.size(); ++j)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0 - iou(tracks[i], dets[j]);
  return d;
}

Eigen::MatrixXd feature_distance(std::span<const Eigen::VectorXd> tracks, std::span<const Eigen::VectorXd> dets) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(tracks.size()), static_cast<Eigen::Index>(dets.size()));
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (tracks[i].size() != dets[j].size()) throw std::invalid_argument("feature_distance: dimension mismatch");
      const double cos = std::clamp(tracks[i].dot(dets[j]), -1.0, 1.0);
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0 - std::max(0.0, cos);
    }
  }
  return d;
}

DistanceMatrices fused_distance(const Eigen::MatrixXd& d_feat, const Eigen::MatrixXd& d_iou) {
  if (d_feat.rows() != d_iou.rows() || d_feat.cols() != d_iou.cols()) {
    throw std::invalid_argument("fused_distance: matrix shapes differ");
  }
  DistanceMatrices m{d_feat, d_iou, d_feat, d_feat};
  for (Eigen::Index i = 0; i < d_feat.rows(); ++i) {
    for (Eigen::Index j = 0; j < d_feat.cols(); ++j) {
      const double gate = d_iou(i, j) < 1.0 ? 1.0 : 0.0;
      m.d_feat_gated(i, j) = 1.0 - (1.0 - d_feat(i, j)) * gate;
      m.d(i, j) = std::sqrt(m.d_feat_gated(i, j) * d_iou(i, j));
    }
  }
  return m;
}

Eigen::VectorXd ema_update(const Eigen::VectorXd& prev, const Eigen::VectorXd& next, double momentum) {
  if (prev.size() != next.size()) throw std::invalid_argument("ema_update: dimension mismatch");
  Eigen::VectorXd v = momentum * prev + (1.0 - momentum) * next;
  const double n = v.norm();
  if (n < 1e-12) return next;
  return v / n;
}

}  // namespace finetrack::tracker
