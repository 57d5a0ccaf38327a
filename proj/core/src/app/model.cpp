#include "finetrack/app/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace finetrack::app {

ModelConfig model_config(const RunConfig& c) {
  ModelConfig m;
  m.fafpn.scale_channels = {synth::ToyBackbone::kChannels[2], synth::ToyBackbone::kChannels[1],
                            synth::ToyBackbone::kChannels[0]};
  m.fafpn.unified_channels = c.model.unified_channels;
  m.fafpn.num_parts = c.model.num_parts;
  m.fafpn.flow_kernel = c.model.flow_kernel;
  m.fafpn.use_flow_alignment = c.model.use_flow_alignment;
  m.embedding.channels = c.model.unified_channels;
  m.embedding.num_parts = c.model.num_parts;
  m.embedding.global_dim = c.model.global_dim;
  m.embedding.part_dim = c.model.part_dim;
  m.embedding.use_part_masks = c.model.use_part_masks;
  m.roi = {c.model.roi_h, c.model.roi_w};
  m.num_identities = c.scene.num_identities;
  return m;
}

ReidModel::ReidModel(const ModelConfig& config, std::uint64_t seed) : cfg_(config) {
  cfg_.fafpn.validate();
  Rng backbone_rng(mix_seed(seed, 1));
  backbone_ = synth::ToyBackbone(frozen_, "backbone", backbone_rng);
  Rng fafpn_rng(mix_seed(seed, 2));
  fafpn_ = nn::Fafpn(trainable_, "fafpn", cfg_.fafpn, fafpn_rng);
  Rng head_rng(mix_seed(seed, 3));
  head_ = repr::EmbeddingHead(trainable_, "embed", cfg_.embedding, head_rng);
  Rng cls_rng(mix_seed(seed, 4));
  classifiers_ = objectives::Classifiers(trainable_, "classifier", cfg_.embedding.num_parts, cfg_.embedding.part_dim,
                                         cfg_.embedding.global_dim, cfg_.num_identities, cls_rng);
}

FeaturePyramid ReidModel::backbone(const ad::Tensor& images) const {
  ad::NoGradGuard no_grad;
  FeaturePyramid out;
  for (const ad::Var& m : backbone_(ad::Var::constant(images))) out.push_back(m.value());
  return out;
}

ModelForward ReidModel::forward(const FeaturePyramid& pyramid, std::span<const ad::RoiBox> rois, bool training) const {
  std::vector<ad::Var> maps;
  for (const ad::Tensor& t : pyramid) maps.push_back(ad::Var::constant(t));
  const std::vector<ad::Var> crops = synth::roi_pyramid(maps, rois, cfg_.roi);
  ModelForward f;
  f.fafpn = fafpn_(crops, training);
  f.embeddings = head_(f.fafpn.mask_features, f.fafpn.reid_features);
  return f;
}

std::vector<Eigen::VectorXd> ReidModel::describe(const ad::Tensor& image, std::span<const Box> boxes) const {
  if (boxes.empty()) return {};
  ad::NoGradGuard no_grad;
  const FeaturePyramid pyramid = backbone(image.reshaped({1, image.dim(0), image.dim(1), image.dim(2)}));
  std::vector<ad::RoiBox> rois;
  for (const Box& b : boxes) rois.push_back({0, b.x1, b.y1, b.x2, b.y2});
  return repr::descriptors(forward(pyramid, rois, false).embeddings);
}

nn::StateDict ReidModel::state_dict() const {
  nn::StateDict s = frozen_.state_dict();
  s.merge(trainable_.state_dict());
  return s;
}

void ReidModel::load_state_dict(const nn::StateDict& state) {
  frozen_.load_state_dict(state);
  trainable_.load_state_dict(state);
}

ad::Tensor stack_batch(std::span<const ad::Tensor* const> items) {
  if (items.empty()) throw std::invalid_argument("stack_batch: no items");
  ad::Shape inner = items[0]->shape();
  if (inner.size() == 4 && inner[0] == 1) inner.erase(inner.begin());
  ad::Shape shape{static_cast<int>(items.size())};
  shape.insert(shape.end(), inner.begin(), inner.end());
  ad::Tensor out(shape);
  const std::size_t n = ad::shape_numel(inner);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i]->size() != n) throw std::invalid_argument("stack_batch: items differ in size");
    std::copy(items[i]->ptr(), items[i]->ptr() + n, out.ptr() + i * n);
  }
  return out;
}

}  // namespace finetrack::app
