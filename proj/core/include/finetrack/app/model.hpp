#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "finetrack/app/config.hpp"
#include "finetrack/box.hpp"
#include "finetrack/nn/fafpn.hpp"
#include "finetrack/objectives/losses.hpp"
#include "finetrack/representation/embedding.hpp"
#include "finetrack/synthetic/backbone.hpp"
#include "finetrack/synthetic/roi_align.hpp"

namespace finetrack::app {

struct ModelConfig {
  nn::FafpnConfig fafpn;
  repr::EmbeddingConfig embedding;
  synth::RoiGrid roi;
  int num_identities = 8;
};

ModelConfig model_config(const RunConfig& config);

/// Backbone maps of a batch of frames, finest to coarsest, each (N, C, H, W).
using FeaturePyramid = std::vector<ad::Tensor>;

struct ModelForward {
  nn::FafpnOutput fafpn;
  repr::TargetEmbeddings embeddings;
};

/// Frozen toy backbone, ROI cropping, FAFPN, embedding head and the
/// training-only classifiers.
class ReidModel {
 public:
  ReidModel(const ModelConfig& config, std::uint64_t seed);

  /// images (N, 3, H, W). Computed without recording gradients.
  FeaturePyramid backbone(const ad::Tensor& images) const;

  /// `rois` index into the batch of `pyramid`.
  ModelForward forward(const FeaturePyramid& pyramid, std::span<const ad::RoiBox> rois, bool training) const;

  /// Unit-norm descriptors of `boxes` in one (3, H, W) frame, evaluation mode.
  std::vector<Eigen::VectorXd> describe(const ad::Tensor& image, std::span<const Box> boxes) const;

  nn::ParameterSet& trainable() { return trainable_; }
  const objectives::Classifiers& classifiers() const { return classifiers_; }
  const ModelConfig& config() const { return cfg_; }

  /// Backbone and trainable entries ("backbone.*", "fafpn.*", "embed.*", "classifier.*").
  nn::StateDict state_dict() const;
  void load_state_dict(const nn::StateDict& state);

 private:
  ModelConfig cfg_;
  nn::ParameterSet frozen_, trainable_;
  synth::ToyBackbone backbone_;
  nn::Fafpn fafpn_;
  repr::EmbeddingHead head_;
  objectives::Classifiers classifiers_;
};

/// Stacks (1, C, H, W) or (C, H, W) tensors along a new leading axis.
ad::Tensor stack_batch(std::span<const ad::Tensor* const> items);

}  // namespace finetrack::app
