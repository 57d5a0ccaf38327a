#pragma once

#include <string>

#include "finetrack/nn/parameters.hpp"

namespace finetrack::nn {

enum class Init { kDefault, kZero };

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParameterSet& ps, const std::string& name, int in_channels, int out_channels, int kernel, int stride,
         int padding, Rng& rng, Init init = Init::kDefault);

  ad::Var operator()(const ad::Var& x) const { return ad::conv2d(x, weight_, bias_, stride_, padding_); }

  const ad::Var& weight() const { return weight_; }
  const ad::Var& bias() const { return bias_; }
  int in_channels() const { return weight_.dim(1); }
  int out_channels() const { return weight_.dim(0); }

 private:
  ad::Var weight_, bias_;
  int stride_ = 1, padding_ = 0;
};

/// Scale initialized to 1 and shift to 0, so the layer starts as identity
/// in evaluation mode.
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(ParameterSet& ps, const std::string& name, int channels);

  ad::Var operator()(const ad::Var& x, bool training) const {
    return ad::batch_norm(x, gamma_, beta_, *state_, training);
  }

 private:
  ad::Var gamma_, beta_;
  std::shared_ptr<ad::BatchNormState> state_;
};

class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& ps, const std::string& name, int in_features, int out_features, Rng& rng);

  ad::Var operator()(const ad::Var& x) const { return ad::linear(x, weight_, bias_); }
  int in_features() const { return weight_.dim(1); }
  int out_features() const { return weight_.dim(0); }

 private:
  ad::Var weight_, bias_;
};

/// Residual channel transform: h = BN1(Conv1x1(x)), out = ReLU(h + BN2(Conv1x1(h))).
class ResBlock {
 public:
  ResBlock() = default;
  ResBlock(ParameterSet& ps, const std::string& name, int in_channels, int out_channels, Rng& rng);

  ad::Var operator()(const ad::Var& x, bool training) const;
  int in_channels() const { return conv1_.in_channels(); }
  int out_channels() const { return conv1_.out_channels(); }

 private:
  Conv2d conv1_, conv2_;
  BatchNorm2d bn1_, bn2_;
};

/// Bilinear (align_corners = false) upsampling; rejects shrinking targets.
ad::Var bilinear_upsample(const ad::Var& x, int out_h, int out_w);

struct FlowAlignOutput {
  ad::Var fused;
  ad::Var flow_down;  // offsets applied to the fine map
  ad::Var flow_up;    // offsets applied to the upsampled coarse map
};

/// Flow Alignment Module: predicts two semantic flows from the concatenated
/// (upsampled coarse, fine) pair, warps each input by its flow, and sums.
class FlowAlign {
 public:
  FlowAlign() = default;
  /// The flow predictor starts at zero, which makes the module an FPN sum.
  FlowAlign(ParameterSet& ps, const std::string& name, int channels, int flow_kernel, Rng& rng,
            Init init = Init::kZero);

  FlowAlignOutput operator()(const ad::Var& f_low, const ad::Var& f_high) const;
  const Conv2d& flow_conv() const { return flow_conv_; }

 private:
  int channels_ = 0;
  Conv2d flow_conv_;
};

}  // namespace finetrack::nn
