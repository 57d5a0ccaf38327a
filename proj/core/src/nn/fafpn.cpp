#include "finetrack/nn/fafpn.hpp"

#include <stdexcept>

namespace finetrack::nn {

void FafpnConfig::validate() const {
  if (num_scales() < 2) throw std::invalid_argument("FAFPN needs at least 2 scales");
  for (int c : scale_channels)
    if (c < 1) throw std::invalid_argument("FAFPN scale channels must be positive");
  if (unified_channels < 1 || num_parts < 1) throw std::invalid_argument("FAFPN sizes must be positive");
  if (unified_channels % num_parts != 0) {
    throw std::invalid_argument("unified channels " + std::to_string(unified_channels) +
                                " not divisible by part count " + std::to_string(num_parts));
  }
}

Fafpn::Fafpn(ParameterSet& ps, const std::string& name, const FafpnConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  for (int s = 0; s < cfg_.num_scales(); ++s) {
    lateral_.emplace_back(ps, name + ".lateral" + std::to_string(s), cfg_.scale_channels[s], cfg_.unified_channels,
                          rng);
  }
  if (cfg_.use_flow_alignment) {
    for (int s = 1; s < cfg_.num_scales(); ++s) {
      align_.emplace_back(ps, name + ".fam" + std::to_string(s), cfg_.unified_channels, cfg_.flow_kernel, rng);
    }
  }
  mask_head_ = ResBlock(ps, name + ".mask_head", cfg_.unified_channels, cfg_.unified_channels, rng);
  reid_head_ = ResBlock(ps, name + ".reid_head", cfg_.unified_channels, cfg_.unified_channels, rng);
}

FafpnOutput Fafpn::operator()(std::span<const ad::Var> maps, bool training) const {
  if (static_cast<int>(maps.size()) != cfg_.num_scales()) {
    throw std::invalid_argument("FAFPN expects " + std::to_string(cfg_.num_scales()) + " maps, got " +
                                std::to_string(maps.size()));
  }
  for (int s = 0; s < cfg_.num_scales(); ++s) {
    if (maps[s].value().rank() != 4 || maps[s].dim(1) != cfg_.scale_channels[s]) {
      throw std::invalid_argument("FAFPN scale " + std::to_string(s) + ": expected " +
                                  std::to_string(cfg_.scale_channels[s]) + " channels, got " +
                                  ad::shape_string(maps[s].shape()));
    }
  }

  FafpnOutput out;
  ad::Var agg = lateral_[0](maps[0], training);
  for (int s = 1; s < cfg_.num_scales(); ++s) {
    ad::Var lat = lateral_[s](maps[s], training);
    if (cfg_.use_flow_alignment) {
      FlowAlignOutput st = align_[s - 1](agg, lat);
      agg = st.fused;
      out.stages.push_back(std::move(st));
    } else {
      agg = ad::add(bilinear_upsample(agg, lat.dim(2), lat.dim(3)), lat);
    }
  }
  out.mask_features = mask_head_(agg, training);
  out.reid_features = reid_head_(agg, training);
  return out;
}

}  // namespace finetrack::nn
