#pragma once

#include <cstdint>
#include <random>

#include "finetrack/autograd/tensor.hpp"

namespace finetrack {

/// Seeded generator with platform-independent derived distributions.
/// std::*_distribution outputs are implementation-defined, so uniform and
/// normal draws are computed from the raw 64-bit engine output here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Fisher-Yates with `below`, reproducible across standard libraries.
  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed from a base seed and a tag.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag);

ad::Tensor uniform_tensor(ad::Shape shape, double lo, double hi, Rng& rng);
ad::Tensor normal_tensor(ad::Shape shape, double stddev, Rng& rng);

}  // namespace finetrack
