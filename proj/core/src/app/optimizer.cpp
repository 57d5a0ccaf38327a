#include "finetrack/app/optimizer.hpp"

#include <cmath>

namespace finetrack::app {

void Adam::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_), c2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (auto& [name, p] : params_.parameters()) {
    if (!p.has_grad()) continue;
    const ad::Tensor& g = p.grad();
    ad::Tensor& m = m_.try_emplace(name, ad::Tensor(g.shape())).first->second;
    ad::Tensor& v = v_.try_emplace(name, ad::Tensor(g.shape())).first->second;
    ad::Var handle = p;
    ad::Tensor& w = handle.mutable_value();
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
    }
  }
}

double step_decay(double base, int epoch, int decay_epoch, double factor) {
  return epoch >= decay_epoch ? base * factor : base;
}

}  // namespace finetrack::app
