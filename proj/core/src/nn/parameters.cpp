#include "finetrack/nn/parameters.hpp"

#include <cmath>
#include <stdexcept>

namespace finetrack::nn {

ad::Var ParameterSet::add_parameter(const std::string& name, ad::Tensor init) {
  if (params_.contains(name) || bn_states_.contains(name)) throw std::logic_error("duplicate parameter name: " + name);
  auto v = ad::Var::parameter(std::move(init));
  params_.emplace(name, v);
  return v;
}

std::shared_ptr<ad::BatchNormState> ParameterSet::add_batch_norm_state(const std::string& name, int channels) {
  if (bn_states_.contains(name)) throw std::logic_error("duplicate batch-norm state: " + name);
  auto st = std::make_shared<ad::BatchNormState>();
  st->running_mean = ad::Tensor({channels}, 0.0);
  st->running_var = ad::Tensor({channels}, 1.0);
  bn_states_.emplace(name, st);
  return st;
}

ad::Var& ParameterSet::parameter(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

void ParameterSet::zero_grad() {
  for (auto& [_, v] : params_) v.zero_grad();
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, v] : params_) n += v.value().size();
  return n;
}

StateDict ParameterSet::state_dict() const {
  StateDict out;
  for (const auto& [name, v] : params_) out.emplace(name, v.value());
  for (const auto& [name, st] : bn_states_) {
    out.emplace(name + ".running_mean", st->running_mean);
    out.emplace(name + ".running_var", st->running_var);
  }
  return out;
}

void ParameterSet::load_state_dict(const StateDict& state, bool strict) {
  auto assign = [&](const std::string& key, ad::Tensor& dst) {
    auto it = state.find(key);
    if (it == state.end()) {
      if (strict) throw std::runtime_error("checkpoint is missing entry: " + key);
      return;
    }
    if (it->second.shape() != dst.shape()) {
      throw std::runtime_error("checkpoint entry " + key + " has shape " + ad::shape_string(it->second.shape()) +
                               ", expected " + ad::shape_string(dst.shape()));
    }
    dst = it->second;
  };
  for (auto& [name, v] : params_) assign(name, v.mutable_value());
  for (auto& [name, st] : bn_states_) {
    assign(name + ".running_mean", st->running_mean);
    assign(name + ".running_var", st->running_var);
  }
}

ad::Tensor kaiming_uniform(ad::Shape shape, int fan_in, Rng& rng, double gain) {
  const double bound = gain * std::sqrt(6.0 / std::max(1, fan_in));
  return uniform_tensor(std::move(shape), -bound, bound, rng);
}

}  // namespace finetrack::nn
