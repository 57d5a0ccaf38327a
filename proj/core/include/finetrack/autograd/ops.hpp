#pragma once

#include <span>
#include <vector>

#include "finetrack/autograd/variable.hpp"

/// Differentiable primitives. Feature maps are NCHW. Every op validates its
/// shape contract and throws std::invalid_argument on violation.
namespace finetrack::ad {

// Elementwise and structural ---------------------------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var relu(const Var& x);
Var sigmoid(const Var& x);
Var softplus(const Var& x);
Var sum(const Var& x);
Var mean(const Var& x);
/// Weighted sum of scalar vars.
Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights);
Var reshape(const Var& x, Shape shape);
/// Concatenation along axis 1 (channels for NCHW, features for N x D).
Var concat(std::span<const Var> parts);
/// Slice [begin, begin + count) along axis 1.
Var slice(const Var& x, int begin, int count);

// Dense and convolutional -------------------------------------------------

/// x (N, in), weight (out, in), bias (out) or empty Var.
Var linear(const Var& x, const Var& weight, const Var& bias);
/// x (N, C, H, W), weight (O, C, k, k), bias (O) or empty Var.
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride = 1, int padding = 0);

struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

/// Batch statistics over (N, H, W) when `training`, running statistics
/// otherwise. Training mode updates `state` in place.
Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state, bool training);

// Sampling ----------------------------------------------------------------

/// Bilinear resize, align_corners = false.
Var bilinear_resize(const Var& x, int out_h, int out_w);
/// out(p) = bilinear sample of x at p + flow(p); flow (N, 2, H, W) holds
/// (dx, dy) in grid units. Out-of-bounds taps read zero.
Var warp(const Var& x, const Var& flow);

/// Box in image pixels together with the batch element it crops from.
struct RoiBox {
  int batch_index = 0;
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

/// ROIAlign with one bin-center sample per output cell and half-pixel
/// aligned coordinates. Output (rois, C, out_h, out_w).
Var roi_align(const Var& feature_map, std::span<const RoiBox> rois, int out_h, int out_w, double stride);

// Reductions used by the representation heads --------------------------------

/// Max over axis 1: (N, K, H, W) -> (N, 1, H, W).
Var channel_max(const Var& x);
/// out[n, c] = sum_p F[n,c,p] m[n,p] / (sum_p m[n,p] + eps); mask (N, 1, H, W).
Var weighted_pool(const Var& features, const Var& mask, double eps = 1e-6);
/// Scaled dot-product attention over spatial positions.
/// q, k (N, d, P); v (N, dv, P). out[:, i] = sum_j softmax_j(q_i . k_j / sqrt(d)) v_j.
Var spatial_attention(const Var& q, const Var& k, const Var& v);

}  // namespace finetrack::ad
