#include "finetrack/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace finetrack::nn {

Conv2d::Conv2d(ParameterSet& ps, const std::string& name, int in_channels, int out_channels, int kernel, int stride,
               int padding, Rng& rng, Init init)
    : stride_(stride), padding_(padding) {
  const ad::Shape wshape{out_channels, in_channels, kernel, kernel};
  ad::Tensor w = init == Init::kZero ? ad::Tensor(wshape, 0.0)
                                     : kaiming_uniform(wshape, in_channels * kernel * kernel, rng);
  weight_ = ps.add_parameter(name + ".weight", std::move(w));
  bias_ = ps.add_parameter(name + ".bias", ad::Tensor({out_channels}, 0.0));
}

BatchNorm2d::BatchNorm2d(ParameterSet& ps, const std::string& name, int channels) {
  gamma_ = ps.add_parameter(name + ".gamma", ad::Tensor({channels}, 1.0));
  beta_ = ps.add_parameter(name + ".beta", ad::Tensor({channels}, 0.0));
  state_ = ps.add_batch_norm_state(name, channels);
}

Linear::Linear(ParameterSet& ps, const std::string& name, int in_features, int out_features, Rng& rng) {
  weight_ = ps.add_parameter(name + ".weight",
                             kaiming_uniform({out_features, in_features}, in_features, rng, 1.0 / std::sqrt(2.0)));
  bias_ = ps.add_parameter(name + ".bias", ad::Tensor({out_features}, 0.0));
}

ResBlock::ResBlock(ParameterSet& ps, const std::string& name, int in_channels, int out_channels, Rng& rng)
    : conv1_(ps, name + ".conv1", in_channels, out_channels, 1, 1, 0, rng),
      conv2_(ps, name + ".conv2", out_channels, out_channels, 1, 1, 0, rng),
      bn1_(ps, name + ".bn1", out_channels),
      bn2_(ps, name + ".bn2", out_channels) {}

ad::Var ResBlock::operator()(const ad::Var& x, bool training) const {
  if (x.value().rank() != 4 || x.dim(1) != in_channels()) {
    throw std::invalid_argument("ResBlock: expected " + std::to_string(in_channels()) + " input channels, got " +
                                ad::shape_string(x.shape()));
  }
  ad::Var h = bn1_(conv1_(x), training);
  return ad::relu(ad::add(h, bn2_(conv2_(h), training)));
}

ad::Var bilinear_upsample(const ad::Var& x, int out_h, int out_w) {
  if (x.value().rank() != 4) throw std::invalid_argument("bilinear_upsample: expected NCHW input");
  if (out_h < x.dim(2) || out_w < x.dim(3)) {
    throw std::invalid_argument("bilinear_upsample: target " + std::to_string(out_h) + "x" + std::to_string(out_w) +
                                " smaller than source " + ad::shape_string(x.shape()));
  }
  return ad::bilinear_resize(x, out_h, out_w);
}

FlowAlign::FlowAlign(ParameterSet& ps, const std::string& name, int channels, int flow_kernel, Rng& rng, Init init)
    : channels_(channels),
      flow_conv_(ps, name + ".flow_conv", 2 * channels, 4, flow_kernel, 1, flow_kernel / 2, rng, init) {
  if (flow_kernel < 1 || flow_kernel % 2 == 0) throw std::invalid_argument("FlowAlign: flow kernel must be odd");
}

FlowAlignOutput FlowAlign::operator()(const ad::Var& f_low, const ad::Var& f_high) const {
  if (f_low.value().rank() != 4 || f_high.value().rank() != 4 || f_low.dim(1) != channels_ ||
      f_high.dim(1) != channels_ || f_low.dim(0) != f_high.dim(0)) {
    throw std::invalid_argument("FlowAlign: channel mismatch " + ad::shape_string(f_low.shape()) + " vs " +
                                ad::shape_string(f_high.shape()) + " (expected " + std::to_string(channels_) + ")");
  }
  const int H = f_high.dim(2), W = f_high.dim(3);
  ad::Var up = bilinear_upsample(f_low, H, W);
  const ad::Var pair[] = {up, f_high};
  ad::Var flows = flow_conv_(ad::concat(pair));
  FlowAlignOutput out;
  out.flow_down = ad::slice(flows, 0, 2);
  out.flow_up = ad::slice(flows, 2, 2);
  out.fused = ad::add(ad::warp(f_high, out.flow_down), ad::warp(up, out.flow_up));
  return out;
}

}  // namespace finetrack::nn
