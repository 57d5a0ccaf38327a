#include <benchmark/benchmark.h>

#include "finetrack/nn/fafpn.hpp"

using namespace finetrack;
using ad::Var;

namespace {

void BM_Conv2dForward(benchmark::State& state) {
  const int channels = static_cast<int>(state.range(0));
  const int kernel = static_cast<int>(state.range(1));
  Rng rng(1);
  nn::ParameterSet ps;
  nn::Conv2d conv(ps, "conv", channels, channels, kernel, 1, kernel / 2, rng);
  const Var x = Var::constant(normal_tensor({8, channels, 16, 8}, 1.0, rng));
  for (auto _ : state) benchmark::DoNotOptimize(conv(x).value().ptr());
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_Conv2dForward)->Args({64, 1})->Args({192, 1})->Args({64, 3})->Unit(benchmark::kMicrosecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const int channels = static_cast<int>(state.range(0));
  Rng rng(2);
  nn::ParameterSet ps;
  nn::Conv2d conv(ps, "conv", channels, channels, 1, 1, 0, rng);
  const ad::Tensor input = normal_tensor({8, channels, 16, 8}, 1.0, rng);
  for (auto _ : state) {
    ps.zero_grad();
    const Var x = Var::parameter(input);
    ad::backward(ad::sum(conv(x)));
    benchmark::DoNotOptimize(x.grad().ptr());
  }
}
BENCHMARK(BM_Conv2dBackward)->Arg(64)->Arg(192)->Unit(benchmark::kMicrosecond);

// Backbone maps of eight 256x128 crops at strides 8, 16 and 32.
std::vector<Var> pyramid(Rng& rng) {
  return {Var::constant(normal_tensor({8, 256, 8, 4}, 1.0, rng)),
          Var::constant(normal_tensor({8, 128, 16, 8}, 1.0, rng)),
          Var::constant(normal_tensor({8, 64, 32, 16}, 1.0, rng))};
}

void BM_FafpnForward(benchmark::State& state) {
  nn::FafpnConfig cfg;
  cfg.use_flow_alignment = state.range(0) != 0;
  Rng rng(3);
  nn::ParameterSet ps;
  nn::Fafpn fafpn(ps, "fafpn", cfg, rng);
  const std::vector<Var> maps = pyramid(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fafpn(maps, false).reid_features.value().ptr());
}
BENCHMARK(BM_FafpnForward)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_FafpnForwardBackward(benchmark::State& state) {
  nn::FafpnConfig cfg;
  cfg.use_flow_alignment = state.range(0) != 0;
  Rng rng(4);
  nn::ParameterSet ps;
  nn::Fafpn fafpn(ps, "fafpn", cfg, rng);
  const std::vector<Var> maps = pyramid(rng);
  for (auto _ : state) {
    ps.zero_grad();
    const nn::FafpnOutput out = fafpn(maps, true);
    ad::backward(ad::add(ad::mean(out.mask_features), ad::mean(out.reid_features)));
  }
}
BENCHMARK(BM_FafpnForwardBackward)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace
