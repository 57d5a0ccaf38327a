#pragma once

#include <vector>

#include "finetrack/nn/layers.hpp"

namespace finetrack::repr {

/// One attention branch: 1x1 query/key/value convolutions, scaled softmax
/// attention over spatial positions, a residual add, then a 1x1 conv and
/// sigmoid producing a single-channel mask in (0, 1).
class PartMaskGenerator {
 public:
  PartMaskGenerator() = default;
  PartMaskGenerator(nn::ParameterSet& ps, const std::string& name, int channels, Rng& rng);

  /// block (N, C_b, H, W) -> mask (N, 1, H, W)
  ad::Var operator()(const ad::Var& block) const;

  int channels() const { return channels_; }
  const nn::Conv2d& mask_conv() const { return mask_conv_; }

 private:
  int channels_ = 0;
  nn::Conv2d query_, key_, value_, mask_conv_;
};

struct PartMasks {
  ad::Var part;    // (N, K, H, W)
  ad::Var global;  // (N, 1, H, W), channel max of `part`
};

/// K independent branches over contiguous channel blocks of F_mask.
class MultiHeadPartMasks {
 public:
  MultiHeadPartMasks() = default;
  MultiHeadPartMasks(nn::ParameterSet& ps, const std::string& name, int channels, int num_parts, Rng& rng);

  PartMasks operator()(const ad::Var& mask_features) const;

  int num_parts() const { return static_cast<int>(branches_.size()); }
  const PartMaskGenerator& branch(int k) const { return branches_.at(static_cast<std::size_t>(k)); }

 private:
  int channels_ = 0;
  std::vector<PartMaskGenerator> branches_;
};

}  // namespace finetrack::repr
