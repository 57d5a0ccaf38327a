#include "finetrack/synthetic/roi_align.hpp"

#include <stdexcept>

namespace finetrack::synth {

std::vector<ad::Var> roi_pyramid(std::span<const ad::Var> maps, std::span<const ad::RoiBox> boxes,
                                 const RoiGrid& grid) {
  const int S = static_cast<int>(maps.size());
  if (S == 0) throw std::invalid_argument("roi_pyramid: no feature maps");
  if ((grid.finest_h >> (S - 1)) < 1 || (grid.finest_w >> (S - 1)) < 1) {
    throw std::invalid_argument("roi_pyramid: output grid too small for " + std::to_string(S) + " scales");
  }
  std::vector<ad::Var> out(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    const double stride = 8.0 * (1 << s);
    out[static_cast<std::size_t>(S - 1 - s)] =
        ad::roi_align(maps[static_cast<std::size_t>(s)], boxes, grid.finest_h >> s, grid.finest_w >> s, stride);
  }
  return out;
}

}  // namespace finetrack::synth
