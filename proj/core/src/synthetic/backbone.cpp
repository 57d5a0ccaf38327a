#include "finetrack/synthetic/backbone.hpp"

#include <stdexcept>

namespace finetrack::synth {

ToyBackbone::ToyBackbone(nn::ParameterSet& ps, const std::string& name, Rng& rng) {
  const int widths[] = {3, 16, 32, 64, 128, 256};
  for (int i = 0; i < 5; ++i) {
    convs_.emplace_back(ps, name + ".conv" + std::to_string(i), widths[i], widths[i + 1], 3, 2, 1, rng);
  }
}

std::vector<ad::Var> ToyBackbone::operator()(const ad::Var& image) const {
  const ad::Tensor& v = image.value();
  if (v.rank() != 4 || v.dim(1) != 3) throw std::invalid_argument("toy backbone: expected (N, 3, H, W) image");
  if (v.dim(2) <= 0 || v.dim(3) <= 0 || v.dim(2) % 32 != 0 || v.dim(3) % 32 != 0) {
    throw std::invalid_argument("toy backbone: image size " + std::to_string(v.dim(2)) + "x" +
                                std::to_string(v.dim(3)) + " is not divisible by 32");
  }
  std::vector<ad::Var> maps;
  ad::Var x = image;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    x = ad::relu(convs_[i](x));
    if (i >= 2) maps.push_back(x);
  }
  return maps;
}

}  // namespace finetrack::synth
