#pragma once

#include <Eigen/Core>

#include "finetrack/box.hpp"

namespace finetrack::tracker {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/// Constant-velocity filter over (cx, cy, aspect, height) and their rates.
/// Noise scales with the box height.
struct KalmanParams {
  double std_weight_position = 1.0 / 20.0;
  double std_weight_velocity = 1.0 / 160.0;
};

struct KalmanState {
  Vec8 mean = Vec8::Zero();
  Mat8 covariance = Mat8::Identity();
};

Vec4 box_to_xyah(const Box& box);
Box xyah_to_box(const Vec4& xyah);

KalmanState kalman_initiate(const Box& measurement, const KalmanParams& params = {});
void kalman_predict(KalmanState& state, const KalmanParams& params = {});
void kalman_update(KalmanState& state, const Box& measurement, const KalmanParams& params = {});

inline Box state_box(const KalmanState& state) { return xyah_to_box(state.mean.head<4>()); }

}  // namespace finetrack::tracker
