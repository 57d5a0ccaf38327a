#include <gtest/gtest.h>

#include <cmath>

#include "finetrack/autograd/ops.hpp"
#include "finetrack/nn/layers.hpp"
#include "gradient_suite.hpp"
#include "oracles.hpp"

using namespace finetrack;
using ad::Tensor;
using ad::Var;

namespace {

Var constant(ad::Shape shape, std::vector<double> data) { return Var::constant(Tensor(std::move(shape), std::move(data))); }

void expect_near_all(const Tensor& t, std::span<const double> expected, double tol) {
  ASSERT_EQ(t.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(t[i], expected[i], tol) << "index " << i;
}

}  // namespace

class GradientCaseTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GradientCaseTest, MatchesCentralDifferencesOnFiveSeeds) {
  const auto& c = finetrack::testing::gradient_cases()[GetParam()];
  for (std::uint64_t seed = 1; seed <= 5; ++seed) EXPECT_LE(c.run(seed), c.tolerance) << c.name << " seed " << seed;
}

INSTANTIATE_TEST_SUITE_P(All, GradientCaseTest,
                         ::testing::Range<std::size_t>(0, finetrack::testing::gradient_cases().size()),
                         [](const auto& info) { return finetrack::testing::gradient_cases()[info.param].name; });

TEST(Tensor, RejectsMismatchedData) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(ad::add(Var::constant(Tensor({2})), Var::constant(Tensor({3}))), std::invalid_argument);
}

TEST(NoGrad, RecordsNoGraph) {
  Var p = Var::parameter(Tensor({2}, 1.0));
  ad::NoGradGuard guard;
  Var y = ad::sum(ad::mul(p, p));
  EXPECT_FALSE(y.requires_grad());
}

TEST(BilinearResize, PreservesConstants) {
  Var x = Var::constant(Tensor({1, 1, 2, 2}, 3.0));
  const Tensor up = ad::bilinear_resize(x, 4, 4).value();
  for (double v : up.data()) EXPECT_EQ(v, 3.0);
  Var one = Var::constant(Tensor({1, 2, 1, 1}, 1.75));
  const Tensor spread = ad::bilinear_resize(one, 5, 3).value();
  for (double v : spread.data()) EXPECT_EQ(v, 1.75);
}

TEST(BilinearResize, TwoByTwoToFourByFourMatchesOracle) {
  const std::vector<double> src{1, 2, 3, 4};
  // Frozen output of the hand-rolled align_corners=false oracle.
  const std::vector<double> frozen{1.0, 1.25, 1.75, 2.0, 1.5, 1.75, 2.25, 2.5,
                                   2.5, 2.75, 3.25, 3.5, 3.0, 3.25, 3.75, 4.0};
  EXPECT_EQ(finetrack::testing::bilinear_resize_oracle(src, 2, 2, 4, 4), frozen);
  expect_near_all(ad::bilinear_resize(constant({1, 1, 2, 2}, src), 4, 4).value(), frozen, 1e-6);
}

TEST(BilinearResize, StaysWithinInputRange) {
  Rng rng(3);
  Var x = Var::constant(uniform_tensor({1, 2, 3, 4}, -2.0, 5.0, rng));
  const Tensor y = ad::bilinear_resize(x, 9, 11).value();
  const auto [lo, hi] = std::minmax_element(x.value().data().begin(), x.value().data().end());
  for (double v : y.data()) {
    EXPECT_GE(v, *lo - 1e-12);
    EXPECT_LE(v, *hi + 1e-12);
  }
}

TEST(BilinearUpsample, RejectsShrinking) {
  EXPECT_THROW(nn::bilinear_upsample(Var::constant(Tensor({1, 1, 4, 4})), 2, 4), std::invalid_argument);
}

TEST(Warp, ZeroFlowIsIdentity) {
  Rng rng(5);
  Var x = Var::constant(normal_tensor({2, 3, 4, 5}, 1.0, rng));
  const Tensor y = ad::warp(x, Var::constant(Tensor({2, 2, 4, 5}))).value();
  expect_near_all(y, x.value().data(), 1e-6);
}

TEST(Warp, UnitShiftReadsRightNeighbourWithZeroPadding) {
  Var x = constant({1, 1, 2, 2}, {1, 2, 3, 4});
  Var flow = constant({1, 2, 2, 2}, {1, 1, 1, 1, 0, 0, 0, 0});
  expect_near_all(ad::warp(x, flow).value(), std::vector<double>{2, 0, 4, 0}, 1e-12);
}

TEST(Warp, FlowBeyondTheMapGivesZeros) {
  Rng rng(6);
  Var x = Var::constant(normal_tensor({1, 2, 3, 3}, 1.0, rng));
  Var flow = Var::constant(Tensor({1, 2, 3, 3}, 10.0));
  const Tensor out = ad::warp(x, flow).value();
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(Warp, RejectsShapeMismatch) {
  EXPECT_THROW(ad::warp(Var::constant(Tensor({1, 1, 2, 2})), Var::constant(Tensor({1, 2, 3, 2}))),
               std::invalid_argument);
}

TEST(RoiAlign, ConstantMapGivesConstantCrop) {
  Var m = Var::constant(Tensor({1, 2, 6, 6}, 0.7));
  const ad::RoiBox box{0, 3.0, 5.0, 30.0, 40.0};
  const Tensor out = ad::roi_align(m, std::span(&box, 1), 4, 2, 8.0).value();
  EXPECT_EQ(out.shape(), (ad::Shape{1, 2, 4, 2}));
  for (double v : out.data()) EXPECT_NEAR(v, 0.7, 1e-12);
}

TEST(RoiAlign, BoxOverOneCellReturnsThatCell) {
  Rng rng(8);
  Var m = Var::constant(normal_tensor({1, 1, 4, 5}, 1.0, rng));
  const ad::RoiBox box{0, 16.0, 8.0, 24.0, 16.0};  // cell (row 1, col 2) at stride 8
  EXPECT_NEAR(ad::roi_align(m, std::span(&box, 1), 1, 1, 8.0).value()[0], m.value().at(0, 0, 1, 2), 1e-12);
}

TEST(RoiAlign, RampMapMatchesHandOracle) {
  std::vector<double> ramp(16);
  for (int i = 0; i < 16; ++i) ramp[i] = i;  // value = 4 y + x
  // Bin centers sit at feature coordinates 0.5 and 2.5 on both axes.
  auto oracle = [](double y, double x) { return 4.0 * y + x; };
  const std::vector<double> frozen{2.5, 4.5, 10.5, 12.5};
  EXPECT_EQ((std::vector<double>{oracle(0.5, 0.5), oracle(0.5, 2.5), oracle(2.5, 0.5), oracle(2.5, 2.5)}), frozen);
  const ad::RoiBox box{0, 0.0, 0.0, 4.0, 4.0};
  expect_near_all(ad::roi_align(constant({1, 1, 4, 4}, ramp), std::span(&box, 1), 2, 2, 1.0).value(), frozen, 1e-6);
}

TEST(RoiAlign, RejectsDegenerateBox) {
  Var m = Var::constant(Tensor({1, 1, 4, 4}));
  const ad::RoiBox box{0, 5.0, 5.0, 5.0, 9.0};
  EXPECT_THROW(ad::roi_align(m, std::span(&box, 1), 2, 2, 8.0), std::invalid_argument);
}

TEST(RoiAlign, ShiftingBoxAndContentByOneStrideGivesTheSameCrop) {
  Rng rng(9);
  const Tensor base = normal_tensor({1, 2, 6, 7}, 1.0, rng);
  Tensor shifted({1, 2, 6, 7});
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 1; x < 7; ++x) shifted.at(0, c, y, x) = base.at(0, c, y, x - 1);
  const ad::RoiBox a{0, 9.0, 11.0, 30.0, 37.0}, b{0, 17.0, 11.0, 38.0, 37.0};
  const Tensor ca = ad::roi_align(Var::constant(base), std::span(&a, 1), 4, 3, 8.0).value();
  const Tensor cb = ad::roi_align(Var::constant(shifted), std::span(&b, 1), 4, 3, 8.0).value();
  expect_near_all(cb, ca.data(), 1e-12);
}

TEST(WeightedPool, HandCases) {
  Var f = constant({1, 1, 1, 2}, {1.0, 3.0});
  EXPECT_NEAR(ad::weighted_pool(f, constant({1, 1, 1, 2}, {0.25, 0.75})).value()[0], 2.5 / (1.0 + 1e-6), 1e-12);
  EXPECT_NEAR(ad::weighted_pool(f, constant({1, 1, 1, 2}, {1.0, 1.0})).value()[0], 4.0 / (2.0 + 1e-6), 1e-12);
  EXPECT_NEAR(ad::weighted_pool(f, constant({1, 1, 1, 2}, {0.0, 0.0})).value()[0], 0.0, 1e-12);
}

TEST(ChannelMax, PicksLargestPart) {
  Var parts = constant({1, 6, 1, 1}, {0.2, 0.7, 0.5, 0.5, 0.5, 0.5});
  EXPECT_EQ(ad::channel_max(parts).value()[0], 0.7);
}
