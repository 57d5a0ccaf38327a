#pragma once

#include <span>
#include <string>
#include <vector>

#include "finetrack/nn/layers.hpp"

namespace finetrack::objectives {

struct LossWeights {
  double alpha = 3.0;  // part terms
  double beta = 0.3;   // global terms
  double gamma = 2.0;  // diversity
};

constexpr double kProbabilityFloor = 1e-12;
constexpr double kNormFloor = 1e-12;

struct TripletResult {
  ad::Var loss;
  int valid_anchors = 0;
  /// True when no anchor had both a positive and a negative; `loss` is then
  /// a constant zero. Signals a sampling configuration without positives.
  bool degenerate() const { return valid_anchors == 0; }
};

/// Batch-hard triplet loss with soft margin over Euclidean distances:
/// mean over valid anchors of softplus(max_pos d - min_neg d).
TripletResult soft_margin_triplet(const ad::Var& features, std::span<const int> labels);

/// -mean_n log(max(softmax(logits_n)[y_n], 1e-12)); logits (N, M).
ad::Var cross_entropy(const ad::Var& logits, std::span<const int> labels);

/// Mean pairwise cosine similarity between the K part vectors of each target
/// over ordered pairs k_i != k_j. f_part (N, K, D), K >= 2.
ad::Var diversity_loss(const ad::Var& part_features);

/// K part classifiers (D_p -> M) and one global classifier (D_g -> M).
/// Training-only: not needed to compute embeddings.
class Classifiers {
 public:
  Classifiers() = default;
  Classifiers(nn::ParameterSet& ps, const std::string& name, int num_parts, int part_dim, int global_dim,
              int num_identities, Rng& rng);

  const nn::Linear& part(int k) const { return part_.at(static_cast<std::size_t>(k)); }
  const nn::Linear& global() const { return global_; }
  int num_parts() const { return static_cast<int>(part_.size()); }
  int num_identities() const { return global_.out_features(); }

 private:
  std::vector<nn::Linear> part_;
  nn::Linear global_;
};

struct TripletLosses {
  ad::Var part;    // mean over k of the per-slice triplet loss
  ad::Var global;
  int degenerate_slices = 0;
};

/// f_part may be an empty Var (global-only models); part terms are then zero.
TripletLosses triplet_losses(const ad::Var& f_part, const ad::Var& f_global, std::span<const int> labels);

struct ClassificationLosses {
  ad::Var part;
  ad::Var global;
};

ClassificationLosses classification_losses(const ad::Var& f_part, const ad::Var& f_global,
                                           std::span<const int> labels, const Classifiers& classifiers);

struct LossBreakdown {
  ad::Var cls_part, tri_part, cls_global, tri_global, diversity, total;
  bool degenerate_triplets = false;

  double value(const ad::Var& v) const { return v.value().item(); }
};

/// alpha (L_cls_p + L_tri_p) + beta (L_cls_g + L_tri_g) + gamma L_div.
ad::Var combine_losses(const ad::Var& cls_part, const ad::Var& tri_part, const ad::Var& cls_global,
                       const ad::Var& tri_global, const ad::Var& diversity, const LossWeights& w);

LossBreakdown total_loss(const ad::Var& f_part, const ad::Var& f_global, std::span<const int> labels,
                         const Classifiers& classifiers, const LossWeights& w);

}  // namespace finetrack::objectives
