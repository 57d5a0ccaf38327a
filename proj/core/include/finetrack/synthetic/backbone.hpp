#pragma once

#include <vector>

#include "finetrack/nn/layers.hpp"

namespace finetrack::synth {

/// Small strided conv stack standing in for a detector backbone. Five 3x3
/// stride-2 convolutions with ReLU; the last three outputs are returned at
/// strides 8, 16 and 32 with 64, 128 and 256 channels.
class ToyBackbone {
 public:
  static constexpr int kNumScales = 3;
  static constexpr int kStrides[kNumScales] = {8, 16, 32};
  static constexpr int kChannels[kNumScales] = {64, 128, 256};

  ToyBackbone() = default;
  ToyBackbone(nn::ParameterSet& ps, const std::string& name, Rng& rng);

  /// image (N, 3, H, W) with H and W divisible by 32. Maps ordered finest
  /// to coarsest.
  std::vector<ad::Var> operator()(const ad::Var& image) const;

 private:
  std::vector<nn::Conv2d> convs_;
};

}  // namespace finetrack::synth
