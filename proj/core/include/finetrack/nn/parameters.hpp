#pragma once

#include <map>
#include <memory>
#include <string>

#include "finetrack/autograd/ops.hpp"
#include "finetrack/autograd/rng.hpp"

namespace finetrack::nn {

/// Flat map of hierarchical names ("fafpn.lateral0.conv1.weight") to arrays.
using StateDict = std::map<std::string, ad::Tensor>;

/// Owns every trainable parameter and normalization buffer of a model.
/// Layers hold shared handles into it, so a ParameterSet must outlive them.
class ParameterSet {
 public:
  ad::Var add_parameter(const std::string& name, ad::Tensor init);
  std::shared_ptr<ad::BatchNormState> add_batch_norm_state(const std::string& name, int channels);

  const std::map<std::string, ad::Var>& parameters() const { return params_; }
  ad::Var& parameter(const std::string& name);
  bool contains(const std::string& name) const { return params_.contains(name); }

  void zero_grad();
  std::size_t parameter_count() const;

  /// Parameters plus "<bn>.running_mean" / "<bn>.running_var" buffers.
  StateDict state_dict() const;
  /// Copies values in place. With `strict`, every entry of this set must be
  /// present in `state` with a matching shape; unknown keys in `state` are
  /// ignored (e.g. training-only classifiers).
  void load_state_dict(const StateDict& state, bool strict = true);

 private:
  std::map<std::string, ad::Var> params_;
  std::map<std::string, std::shared_ptr<ad::BatchNormState>> bn_states_;
};

/// Uniform(-b, b) with b = sqrt(6 / fan_in) scaled by `gain`.
ad::Tensor kaiming_uniform(ad::Shape shape, int fan_in, Rng& rng, double gain = 1.0);

}  // namespace finetrack::nn
