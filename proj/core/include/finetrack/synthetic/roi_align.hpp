#pragma once

#include <span>
#include <vector>

#include "finetrack/autograd/ops.hpp"

namespace finetrack::synth {

/// Output grid of the finest scale; each coarser scale halves both sides.
struct RoiGrid {
  int finest_h = 16;
  int finest_w = 8;
};

/// Crops every box from each backbone map. `maps` ordered finest to
/// coarsest with strides 8, 16, 32, ...; the result is ordered coarsest to
/// finest, matching the FAFPN input order.
std::vector<ad::Var> roi_pyramid(std::span<const ad::Var> maps, std::span<const ad::RoiBox> boxes,
                                 const RoiGrid& grid = {});

}  // namespace finetrack::synth
