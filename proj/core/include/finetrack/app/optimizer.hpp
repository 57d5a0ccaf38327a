#pragma once

#include <map>
#include <string>

#include "finetrack/nn/parameters.hpp"

namespace finetrack::app {

struct AdamConfig {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

/// Adam over every parameter of a set; parameters without a gradient in a
/// step are left untouched.
class Adam {
 public:
  Adam(nn::ParameterSet& params, AdamConfig config = {}) : params_(params), cfg_(config) {}
  void step(double learning_rate);
  int steps() const { return t_; }

 private:
  nn::ParameterSet& params_;
  AdamConfig cfg_;
  std::map<std::string, ad::Tensor> m_, v_;
  int t_ = 0;
};

/// Multiplies `base` by `factor` once `epoch` (0-based) reaches `decay_epoch`.
double step_decay(double base, int epoch, int decay_epoch, double factor);

}  // namespace finetrack::app
