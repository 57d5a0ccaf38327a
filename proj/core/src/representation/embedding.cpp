#include "finetrack/representation/embedding.hpp"

#include <stdexcept>

namespace finetrack::repr {

EmbeddingHead::EmbeddingHead(nn::ParameterSet& ps, const std::string& name, const EmbeddingConfig& cfg, Rng& rng)
    : cfg_(cfg) {
  if (cfg_.use_part_masks) mpmg_ = MultiHeadPartMasks(ps, name + ".mpmg", cfg_.channels, cfg_.num_parts, rng);
  fc_global_ = nn::Linear(ps, name + ".fc_global", cfg_.channels, cfg_.global_dim, rng);
  if (cfg_.use_part_masks) fc_part_ = nn::Linear(ps, name + ".fc_part", cfg_.channels, cfg_.part_dim, rng);
}

TargetEmbeddings EmbeddingHead::operator()(const ad::Var& mask_features, const ad::Var& reid_features) const {
  if (reid_features.value().rank() != 4 || reid_features.dim(1) != cfg_.channels ||
      mask_features.shape() != reid_features.shape()) {
    throw std::invalid_argument("EmbeddingHead: F_mask " + ad::shape_string(mask_features.shape()) + " / F_reid " +
                                ad::shape_string(reid_features.shape()) + " do not match C_u = " +
                                std::to_string(cfg_.channels));
  }
  const int N = reid_features.dim(0);
  TargetEmbeddings out;
  if (!cfg_.use_part_masks) {
    ad::Var ones = ad::Var::constant(ad::Tensor({N, 1, reid_features.dim(2), reid_features.dim(3)}, 1.0));
    out.global = fc_global_(ad::weighted_pool(reid_features, ones, kPoolEpsilon));
    return out;
  }
  out.masks = mpmg_(mask_features);
  std::vector<ad::Var> parts;
  parts.reserve(static_cast<std::size_t>(cfg_.num_parts));
  for (int k = 0; k < cfg_.num_parts; ++k) {
    ad::Var pooled = ad::weighted_pool(reid_features, ad::slice(out.masks.part, k, 1), kPoolEpsilon);
    parts.push_back(ad::reshape(fc_part_(pooled), {N, 1, cfg_.part_dim}));
  }
  out.part = ad::concat(parts);
  out.global = fc_global_(ad::weighted_pool(reid_features, out.masks.global, kPoolEpsilon));
  return out;
}

Eigen::VectorXd l2_normalized(const Eigen::VectorXd& v) {
  const double n = v.norm();
  if (!(n > 1e-12)) throw std::invalid_argument("cannot normalize a zero-norm embedding");
  return v / n;
}

Eigen::VectorXd descriptor(const TargetEmbeddings& emb, int n) {
  const int Dg = emb.global.dim(1);
  Eigen::Map<const Eigen::VectorXd> g(emb.global.value().ptr() + static_cast<std::size_t>(n) * Dg, Dg);
  if (!emb.part) return l2_normalized(g);
  const int K = emb.part.dim(1), Dp = emb.part.dim(2);
  Eigen::VectorXd out(Dg + K * Dp);
  out.head(Dg) = l2_normalized(g);
  for (int k = 0; k < K; ++k) {
    Eigen::Map<const Eigen::VectorXd> p(emb.part.value().ptr() + (static_cast<std::size_t>(n) * K + k) * Dp, Dp);
    out.segment(Dg + k * Dp, Dp) = l2_normalized(p);
  }
  return out.normalized();
}

std::vector<Eigen::VectorXd> descriptors(const TargetEmbeddings& emb) {
  std::vector<Eigen::VectorXd> out;
  const int N = emb.global.dim(0);
  out.reserve(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) out.push_back(descriptor(emb, n));
  return out;
}

}  // namespace finetrack::repr
