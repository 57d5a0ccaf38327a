#include <benchmark/benchmark.h>

#include "finetrack/autograd/rng.hpp"
#include "finetrack/tracker/byte_tracker.hpp"
#include "finetrack/tracker/hungarian.hpp"

using namespace finetrack;

namespace {

void BM_Hungarian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  Eigen::MatrixXd cost(n, n + n / 4);
  for (Eigen::Index i = 0; i < cost.size(); ++i) cost(i) = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(tracker::min_cost_assignment(cost).data());
  state.SetComplexityN(n);
}
BENCHMARK(BM_Hungarian)->RangeMultiplier(2)->Range(8, 256)->Complexity()->Unit(benchmark::kMicrosecond);

// Targets drifting on a grid, one high-score detection each per frame.
void BM_ByteStep(benchmark::State& state) {
  const int targets = static_cast<int>(state.range(0));
  const bool appearance = state.range(1) != 0;
  Rng rng(6);
  std::vector<Eigen::VectorXd> look(static_cast<std::size_t>(targets));
  for (Eigen::VectorXd& v : look) {
    v.resize(1024);
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.normal();
    v.normalize();
  }
  auto frame_detections = [&](int frame) {
    std::vector<tracker::Detection> dets;
    for (int t = 0; t < targets; ++t) {
      const double x = 40.0 * (t % 16) + 0.5 * frame, y = 80.0 * (t / 16);
      tracker::Detection d{{x, y, x + 30, y + 70}, 0.9, {}};
      if (appearance) d.embedding = look[static_cast<std::size_t>(t)];
      dets.push_back(std::move(d));
    }
    return dets;
  };
  tracker::TrackerConfig cfg;
  cfg.use_appearance = appearance;
  tracker::ByteTracker tracker(cfg);
  int frame = 0;
  for (auto _ : state) {
    state.PauseTiming();
    const std::vector<tracker::Detection> dets = frame_detections(frame++);
    state.ResumeTiming();
    benchmark::DoNotOptimize(tracker::byte_step(tracker, dets).data());
  }
}
BENCHMARK(BM_ByteStep)->Args({8, 1})->Args({64, 1})->Args({64, 0})->Unit(benchmark::kMicrosecond);

}  // namespace
