#pragma once

#include <span>
#include <vector>

#include "finetrack/nn/layers.hpp"

namespace finetrack::nn {

struct FafpnConfig {
  /// Input channels per scale, ordered coarsest to finest.
  std::vector<int> scale_channels{256, 128, 64};
  int unified_channels = 192;
  int num_parts = 6;
  int flow_kernel = 3;
  /// When false the top-down pass sums upsampled maps (plain FPN).
  bool use_flow_alignment = true;

  int num_scales() const { return static_cast<int>(scale_channels.size()); }
  /// Throws std::invalid_argument when S < 2, C_u % K != 0 or a size is non-positive.
  void validate() const;
};

struct FafpnOutput {
  ad::Var mask_features;  // F_mask
  ad::Var reid_features;  // F_reid
  std::vector<FlowAlignOutput> stages;  // one per top-down step (empty for plain FPN)
};

/// Lateral ResBlocks project each scale to C_u; a coarse-to-fine chain of
/// FlowAlign modules aggregates them; two ResBlock heads emit F_mask and F_reid.
class Fafpn {
 public:
  Fafpn() = default;
  Fafpn(ParameterSet& ps, const std::string& name, const FafpnConfig& cfg, Rng& rng);

  /// `maps` ordered coarsest to finest, each (N, C_s, H_s, W_s).
  FafpnOutput operator()(std::span<const ad::Var> maps, bool training) const;

  const FafpnConfig& config() const { return cfg_; }
  const std::vector<FlowAlign>& align_modules() const { return align_; }

 private:
  FafpnConfig cfg_;
  std::vector<ResBlock> lateral_;
  std::vector<FlowAlign> align_;
  ResBlock mask_head_, reid_head_;
};

}  // namespace finetrack::nn
