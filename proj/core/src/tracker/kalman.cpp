#include "finetrack/tracker/kalman.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

namespace finetrack::tracker {

namespace {

Mat8 transition() {
  Mat8 f = Mat8::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

void symmetrize(Mat8& p) { p = 0.5 * (p + p.transpose()).eval(); }

}  // namespace

Vec4 box_to_xyah(const Box& b) {
  if (!b.valid()) throw std::invalid_argument("kalman: degenerate measurement box");
  return {b.cx(), b.cy(), b.width() / b.height(), b.height()};
}

Box xyah_to_box(const Vec4& m) {
  const double h = m[3], w = m[2] * m[3];
  return {m[0] - 0.5 * w, m[1] - 0.5 * h, m[0] + 0.5 * w, m[1] + 0.5 * h};
}

KalmanState kalman_initiate(const Box& measurement, const KalmanParams& p) {
  KalmanState s;
  const Vec4 z = box_to_xyah(measurement);
  s.mean.head<4>() = z;
  s.mean.tail<4>().setZero();
  const double h = z[3];
  Vec8 std;
  std << 2 * p.std_weight_position * h, 2 * p.std_weight_position * h, 1e-2, 2 * p.std_weight_position * h,
      10 * p.std_weight_velocity * h, 10 * p.std_weight_velocity * h, 1e-5, 10 * p.std_weight_velocity * h;
  s.covariance = std.array().square().matrix().asDiagonal();
  return s;
}

void kalman_predict(KalmanState& s, const KalmanParams& p) {
  const double h = s.mean[3];
  Vec8 std;
  std << p.std_weight_position * h, p.std_weight_position * h, 1e-2, p.std_weight_position * h,
      p.std_weight_velocity * h, p.std_weight_velocity * h, 1e-5, p.std_weight_velocity * h;
  const Mat8 q = std.array().square().matrix().asDiagonal();
  const Mat8 f = transition();
  s.mean = f * s.mean;
  s.covariance = f * s.covariance * f.transpose() + q;
  symmetrize(s.covariance);
}

void kalman_update(KalmanState& s, const Box& measurement, const KalmanParams& p) {
  const Vec4 z = box_to_xyah(measurement);
  const double h = s.mean[3];
  Vec4 std;
  std << p.std_weight_position * h, p.std_weight_position * h, 1e-1, p.std_weight_position * h;
  const Eigen::Matrix4d r = std.array().square().matrix().asDiagonal();
  const Eigen::Matrix<double, 4, 8> hm = Eigen::Matrix<double, 4, 8>::Identity();
  const Eigen::Matrix4d innovation_cov = hm * s.covariance * hm.transpose() + r;
  const Eigen::LLT<Eigen::Matrix4d> llt(innovation_cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("kalman: innovation covariance is not positive definite");
  // K = P H^T S^-1, solved as S K^T = H P.
  const Eigen::Matrix<double, 8, 4> gain = llt.solve(hm * s.covariance).transpose();
  s.mean += gain * (z - hm * s.mean);
  s.covariance -= gain * innovation_cov * gain.transpose();
  symmetrize(s.covariance);
}

}  // namespace finetrack::tracker
