#include "oracles.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace finetrack::testing {

double brute_force_assignment_cost(const Eigen::MatrixXd& cost) {
  const Eigen::MatrixXd c = cost.rows() <= cost.cols() ? cost : Eigen::MatrixXd(cost.transpose());
  const int rows = static_cast<int>(c.rows()), cols = static_cast<int>(c.cols());
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> used(cols, false);
  std::function<void(int, double)> go = [&](int r, double acc) {
    if (r == rows) {
      best = std::min(best, acc);
      return;
    }
    for (int j = 0; j < cols; ++j) {
      if (used[j]) continue;
      used[j] = true;
      go(r + 1, acc + c(r, j));
      used[j] = false;
    }
  };
  go(0, 0.0);
  return rows == 0 ? 0.0 : best;
}

double brute_force_triplet(const Eigen::MatrixXd& x, std::span<const int> labels) {
  const int n = static_cast<int>(x.rows());
  double total = 0.0;
  int anchors = 0;
  for (int a = 0; a < n; ++a) {
    double best = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < n; ++p) {
      if (p == a || labels[p] != labels[a]) continue;
      for (int q = 0; q < n; ++q) {
        if (labels[q] == labels[a]) continue;
        best = std::max(best, (x.row(a) - x.row(p)).norm() - (x.row(a) - x.row(q)).norm());
      }
    }
    if (best == -std::numeric_limits<double>::infinity()) continue;
    total += std::log(1.0 + std::exp(best));
    ++anchors;
  }
  return anchors ? total / anchors : 0.0;
}

double brute_force_ap(std::span<const double> sim, std::span<const int> relevant) {
  const int n = static_cast<int>(sim.size());
  auto rank_of = [&](int i) {
    int r = 1;
    for (int j = 0; j < n; ++j)
      if (sim[j] > sim[i] || (sim[j] == sim[i] && j < i)) ++r;
    return r;
  };
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (!relevant[i]) continue;
    const int r = rank_of(i);
    int hits = 0;
    for (int j = 0; j < n; ++j)
      if (relevant[j] && rank_of(j) <= r) ++hits;
    sum += static_cast<double>(hits) / r;
    ++count;
  }
  return sum / count;
}

ReferenceKalman::ReferenceKalman(const Box& b, double w_pos, double w_vel)
    : w_pos_(w_pos), w_vel_(w_vel), x_(Eigen::VectorXd::Zero(8)), p_(Eigen::MatrixXd::Zero(8, 8)) {
  const double w = b.x2 - b.x1, h = b.y2 - b.y1;
  x_ << (b.x1 + b.x2) / 2, (b.y1 + b.y2) / 2, w / h, h, 0, 0, 0, 0;
  const double s[8] = {2 * w_pos * h, 2 * w_pos * h, 1e-2, 2 * w_pos * h,
                       10 * w_vel * h, 10 * w_vel * h, 1e-5, 10 * w_vel * h};
  for (int i = 0; i < 8; ++i) p_(i, i) = s[i] * s[i];
}

void ReferenceKalman::predict() {
  Eigen::MatrixXd f = Eigen::MatrixXd::Identity(8, 8);
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1;
  const double h = x_(3);
  const double s[8] = {w_pos_ * h, w_pos_ * h, 1e-2, w_pos_ * h, w_vel_ * h, w_vel_ * h, 1e-5, w_vel_ * h};
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(8, 8);
  for (int i = 0; i < 8; ++i) q(i, i) = s[i] * s[i];
  x_ = f * x_;
  p_ = f * p_ * f.transpose() + q;
}

void ReferenceKalman::update(const Box& b) {
  const double w = b.x2 - b.x1, hb = b.y2 - b.y1;
  Eigen::VectorXd z(4);
  z << (b.x1 + b.x2) / 2, (b.y1 + b.y2) / 2, w / hb, hb;
  Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(4, 8);
  for (int i = 0; i < 4; ++i) hm(i, i) = 1;
  const double h = x_(3);
  const double s[4] = {w_pos_ * h, w_pos_ * h, 1e-1, w_pos_ * h};
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) r(i, i) = s[i] * s[i];
  const Eigen::MatrixXd sm = hm * p_ * hm.transpose() + r;
  const Eigen::MatrixXd k = p_ * hm.transpose() * sm.inverse();
  x_ = x_ + k * (z - hm * x_);
  p_ = (Eigen::MatrixXd::Identity(8, 8) - k * hm) * p_;
}

std::vector<double> bilinear_resize_oracle(const std::vector<double>& src, int h, int w, int oh, int ow) {
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double sy = (y + 0.5) * h / oh - 0.5, sx = (x + 0.5) * w / ow - 0.5;
      sy = std::clamp(sy, 0.0, h - 1.0);
      sx = std::clamp(sx, 0.0, w - 1.0);
      const int y0 = static_cast<int>(std::floor(sy)), x0 = static_cast<int>(std::floor(sx));
      const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
      const double fy = sy - y0, fx = sx - x0;
      const double top = src[y0 * w + x0] * (1 - fx) + src[y0 * w + x1] * fx;
      const double bottom = src[y1 * w + x0] * (1 - fx) + src[y1 * w + x1] * fx;
      out[static_cast<std::size_t>(y) * ow + x] = top * (1 - fy) + bottom * fy;
    }
  }
  return out;
}

}  // namespace finetrack::testing
