#include "finetrack/representation/mpmg.hpp"

#include <stdexcept>

namespace finetrack::repr {

PartMaskGenerator::PartMaskGenerator(nn::ParameterSet& ps, const std::string& name, int channels, Rng& rng)
    : channels_(channels),
      query_(ps, name + ".query", channels, channels, 1, 1, 0, rng),
      key_(ps, name + ".key", channels, channels, 1, 1, 0, rng),
      value_(ps, name + ".value", channels, channels, 1, 1, 0, rng),
      mask_conv_(ps, name + ".mask_conv", channels, 1, 1, 1, 0, rng) {}

ad::Var PartMaskGenerator::operator()(const ad::Var& block) const {
  if (block.value().rank() != 4 || block.dim(1) != channels_) {
    throw std::invalid_argument("PartMaskGenerator: expected " + std::to_string(channels_) +
                                " channels, got " + ad::shape_string(block.shape()));
  }
  const int N = block.dim(0), H = block.dim(2), W = block.dim(3);
  const ad::Shape flat{N, channels_, H * W};
  ad::Var q = ad::reshape(query_(block), flat);
  ad::Var k = ad::reshape(key_(block), flat);
  ad::Var v = ad::reshape(value_(block), flat);
  ad::Var attended = ad::reshape(ad::spatial_attention(q, k, v), {N, channels_, H, W});
  ad::Var refined = ad::add(block, attended);
  return ad::sigmoid(mask_conv_(refined));
}

MultiHeadPartMasks::MultiHeadPartMasks(nn::ParameterSet& ps, const std::string& name, int channels, int num_parts,
                                       Rng& rng)
    : channels_(channels) {
  if (num_parts < 1 || channels % num_parts != 0) {
    throw std::invalid_argument("MultiHeadPartMasks: " + std::to_string(channels) + " channels not divisible by " +
                                std::to_string(num_parts) + " parts");
  }
  const int block = channels / num_parts;
  for (int k = 0; k < num_parts; ++k) {
    branches_.emplace_back(ps, name + ".pmg" + std::to_string(k), block, rng);
  }
}

PartMasks MultiHeadPartMasks::operator()(const ad::Var& mask_features) const {
  if (mask_features.value().rank() != 4 || mask_features.dim(1) != channels_) {
    throw std::invalid_argument("MultiHeadPartMasks: expected " + std::to_string(channels_) + " channels, got " +
                                ad::shape_string(mask_features.shape()));
  }
  const int block = channels_ / num_parts();
  std::vector<ad::Var> masks;
  masks.reserve(branches_.size());
  for (int k = 0; k < num_parts(); ++k) {
    masks.push_back(branches_[k](ad::slice(mask_features, k * block, block)));
  }
  PartMasks out;
  out.part = ad::concat(masks);
  out.global = ad::channel_max(out.part);
  return out;
}

}  // namespace finetrack::repr
