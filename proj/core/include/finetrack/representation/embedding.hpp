#pragma once

#include <Eigen/Core>
#include <vector>

#include "finetrack/representation/mpmg.hpp"

namespace finetrack::repr {

struct EmbeddingConfig {
  int channels = 192;  // C_u
  int num_parts = 6;   // K
  int global_dim = 256;
  int part_dim = 128;
  /// False selects the global-average-pooling baseline: no part masks, no
  /// part embeddings, f_global = FC(mean of F_reid).
  bool use_part_masks = true;
};

struct TargetEmbeddings {
  ad::Var global;  // (N, D_g)
  ad::Var part;    // (N, K, D_p); empty Var without part masks
  PartMasks masks; // empty Vars without part masks
};

/// Mask generation from F_mask, mask-weighted pooling of F_reid, and the two
/// non-shared FC layers (one part FC shared across the K parts).
class EmbeddingHead {
 public:
  EmbeddingHead() = default;
  EmbeddingHead(nn::ParameterSet& ps, const std::string& name, const EmbeddingConfig& cfg, Rng& rng);

  TargetEmbeddings operator()(const ad::Var& mask_features, const ad::Var& reid_features) const;

  const EmbeddingConfig& config() const { return cfg_; }
  const MultiHeadPartMasks& part_masks() const { return mpmg_; }

 private:
  EmbeddingConfig cfg_;
  MultiHeadPartMasks mpmg_;
  nn::Linear fc_global_, fc_part_;
};

constexpr double kPoolEpsilon = 1e-6;

/// Unit-norm retrieval descriptor for target `n`: every component (global,
/// then each part) is L2-normalized, concatenated, and normalized again.
Eigen::VectorXd descriptor(const TargetEmbeddings& emb, int n);
std::vector<Eigen::VectorXd> descriptors(const TargetEmbeddings& emb);

/// Throws when `v` has (near-)zero norm.
Eigen::VectorXd l2_normalized(const Eigen::VectorXd& v);

}  // namespace finetrack::repr
