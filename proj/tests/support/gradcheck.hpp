#pragma once

#include <functional>
#include <vector>

#include "finetrack/autograd/ops.hpp"
#include "finetrack/autograd/rng.hpp"

namespace finetrack::testing {

/// Compares reverse-mode gradients of the scalar `f()` with central finite
/// differences on up to `samples` entries of every leaf. Returns the worst
/// relative error |g_a - g_n| / max(|g_a|, |g_n|, floor) over the leaves,
/// where norms are taken over the sampled entries of one leaf. Leaves with a
/// vanishing analytic gradient report |g_n| / max(1, |f|) instead.
double max_gradient_error(const std::function<ad::Var()>& f, std::vector<ad::Var> leaves, Rng& rng,
                          int samples = 24, double eps = 1e-5, double floor = 1e-8);

/// Scalar readout sum(x * r) with a fixed random r, so every output
/// element carries a distinct weight.
ad::Var random_readout(const ad::Var& x, std::uint64_t seed);

ad::Var random_leaf(const ad::Shape& shape, Rng& rng, double scale = 1.0);

}  // namespace finetrack::testing
