#include <gtest/gtest.h>

#include <cmath>

#include "finetrack/objectives/losses.hpp"
#include "oracles.hpp"

using namespace finetrack;
using ad::Tensor;
using ad::Var;

namespace {

Var constant(ad::Shape shape, std::vector<double> values) { return Var::constant(Tensor(std::move(shape), std::move(values))); }
Var scalar(double v) { return Var::constant(Tensor::scalar(v)); }

Eigen::MatrixXd to_matrix(const Tensor& t) {
  Eigen::MatrixXd m(t.dim(0), t.dim(1));
  for (int i = 0; i < t.dim(0); ++i)
    for (int j = 0; j < t.dim(1); ++j) m(i, j) = t[static_cast<std::size_t>(i) * t.dim(1) + j];
  return m;
}

// Sets a Linear (in = out = M) to the identity map so logits equal inputs.
void make_identity(nn::ParameterSet& ps, const std::string& name, int m) {
  Tensor& w = ps.parameter(name + ".weight").mutable_value();
  w.fill(0.0);
  for (int i = 0; i < m; ++i) w[static_cast<std::size_t>(i) * m + i] = 1.0;
}

}  // namespace

TEST(Triplet, MixedAnchorsOnALine) {
  // Anchor 0: positive at 1, negative at 1. Anchor 1: positive at 1, negative at 2. Anchor 2 has no positive.
  const Var x = constant({3, 1}, {0, 1, -1});
  const objectives::TripletResult r = objectives::soft_margin_triplet(x, std::vector<int>{0, 0, 1});
  EXPECT_EQ(r.valid_anchors, 2);
  EXPECT_NEAR(r.loss.value().item(), 0.5 * (std::log(2.0) + std::log1p(std::exp(-1.0))), 1e-12);
}

TEST(Triplet, AllAnchorsEquidistantGiveLn2) {
  // Regular tetrahedron in 3D: every pairwise distance is equal.
  const double s = 1.0 / std::sqrt(2.0);
  const Var x = constant({4, 3}, {1, 0, -s, -1, 0, -s, 0, 1, s, 0, -1, s});
  const std::vector<int> labels{0, 0, 1, 1};
  const objectives::TripletResult r = objectives::soft_margin_triplet(x, labels);
  EXPECT_EQ(r.valid_anchors, 4);
  EXPECT_NEAR(r.loss.value().item(), std::log(2.0), 1e-12);
}

TEST(Triplet, WellSeparatedIdentitiesApproachZero) {
  const Var x = constant({4, 1}, {0, 0.001, 1000, 1000.001});
  const std::vector<int> labels{0, 0, 1, 1};
  EXPECT_LT(objectives::soft_margin_triplet(x, labels).loss.value().item(), 1e-300 + 1e-12);
}

TEST(Triplet, HandChosenBatchMatchesBruteForce) {
  const Tensor x({4, 2}, {0.0, 0.0, 1.0, 0.5, 0.2, 1.5, 2.0, 1.0});
  const std::vector<int> labels{0, 1, 0, 1};
  const double got = objectives::soft_margin_triplet(Var::constant(x), labels).loss.value().item();
  EXPECT_NEAR(got, finetrack::testing::brute_force_triplet(to_matrix(x), labels), 1e-9);
  // Frozen from the brute-force oracle.
  EXPECT_NEAR(got, 0.7015927012069451, 1e-9);
}

TEST(Triplet, RandomBatchesMatchBruteForce) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = normal_tensor({8, 5}, 1.0, rng);
    std::vector<int> labels(8);
    for (int& l : labels) l = static_cast<int>(rng.below(3));
    EXPECT_NEAR(objectives::soft_margin_triplet(Var::constant(x), labels).loss.value().item(),
                finetrack::testing::brute_force_triplet(to_matrix(x), labels), 1e-9);
  }
}

TEST(Triplet, NoPositivesIsDegenerateZero) {
  const objectives::TripletResult r = objectives::soft_margin_triplet(constant({3, 1}, {0, 1, 2}), std::vector<int>{0, 1, 2});
  EXPECT_TRUE(r.degenerate());
  EXPECT_EQ(r.loss.value().item(), 0.0);
}

TEST(Triplet, LabelCountMismatchRejected) {
  EXPECT_THROW(objectives::soft_margin_triplet(constant({2, 1}, {0, 1}), std::vector<int>{0}), std::invalid_argument);
}

TEST(TripletLosses, IdenticalSlicesEqualSingleSliceLoss) {
  Rng rng(4);
  const Tensor slice = normal_tensor({6, 4}, 1.0, rng);
  Tensor part({6, 3, 4});
  for (int n = 0; n < 6; ++n)
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < 4; ++d) part[(n * 3 + k) * 4 + d] = slice[n * 4 + d];
  const std::vector<int> labels{0, 0, 1, 1, 2, 2};
  const objectives::TripletLosses t = objectives::triplet_losses(Var::constant(part), Var::constant(slice), labels);
  const double single = objectives::soft_margin_triplet(Var::constant(slice), labels).loss.value().item();
  EXPECT_NEAR(t.part.value().item(), single, 1e-12);
  EXPECT_NEAR(t.global.value().item(), single, 1e-12);
  EXPECT_EQ(t.degenerate_slices, 0);
}

TEST(TripletLosses, RandomBatchEqualsPerSliceOracleMean) {
  Rng rng(5);
  const Tensor part = normal_tensor({8, 4, 3}, 1.0, rng);
  const Tensor global = normal_tensor({8, 5}, 1.0, rng);
  const std::vector<int> labels{0, 1, 2, 3, 0, 1, 2, 3};
  double oracle = 0.0;
  for (int k = 0; k < 4; ++k) {
    Eigen::MatrixXd s(8, 3);
    for (int n = 0; n < 8; ++n)
      for (int d = 0; d < 3; ++d) s(n, d) = part[(n * 4 + k) * 3 + d];
    oracle += finetrack::testing::brute_force_triplet(s, labels) / 4.0;
  }
  const objectives::TripletLosses t = objectives::triplet_losses(Var::constant(part), Var::constant(global), labels);
  EXPECT_NEAR(t.part.value().item(), oracle, 1e-9);
  EXPECT_NEAR(t.global.value().item(), finetrack::testing::brute_force_triplet(to_matrix(global), labels), 1e-9);
}

TEST(CrossEntropy, PerfectClassifierGivesZero) {
  const Var logits = constant({2, 3}, {800, 0, 0, 0, 0, 800});
  EXPECT_NEAR(objectives::cross_entropy(logits, std::vector<int>{0, 2}).value().item(), 0.0, 1e-300);
}

TEST(CrossEntropy, UniformOverFourClassesGivesLn4) {
  const Var logits = constant({3, 4}, std::vector<double>(12, 0.7));
  EXPECT_NEAR(objectives::cross_entropy(logits, std::vector<int>{0, 1, 3}).value().item(), std::log(4.0), 1e-12);
  EXPECT_NEAR(std::log(4.0), 1.3863, 1e-4);
}

TEST(CrossEntropy, ZeroProbabilityIsClamped) {
  const Var logits = constant({1, 2}, {0, 2000});
  EXPECT_NEAR(objectives::cross_entropy(logits, std::vector<int>{0}).value().item(), -std::log(1e-12), 1e-9);
}

TEST(CrossEntropy, LabelOutOfRangeRejected) {
  EXPECT_THROW(objectives::cross_entropy(constant({1, 2}, {0, 0}), std::vector<int>{2}), std::invalid_argument);
}

TEST(ClassificationLosses, HandBuiltTablesMatchDirectSummation) {
  // N = 2 targets, K = 2 parts, M = 3 classes; identity classifiers turn log-probabilities into logits.
  const double p_part[2][2][3] = {{{0.7, 0.2, 0.1}, {0.5, 0.25, 0.25}}, {{0.1, 0.6, 0.3}, {0.3, 0.3, 0.4}}};
  const double p_global[2][3] = {{0.8, 0.1, 0.1}, {0.2, 0.2, 0.6}};
  const std::vector<int> labels{0, 2};
  Tensor part({2, 2, 3}), global({2, 3});
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 3; ++m) {
      global[n * 3 + m] = std::log(p_global[n][m]);
      for (int k = 0; k < 2; ++k) part[(n * 2 + k) * 3 + m] = std::log(p_part[n][k][m]);
    }
  nn::ParameterSet ps;
  Rng rng(6);
  objectives::Classifiers cls(ps, "cls", 2, 3, 3, 3, rng);
  make_identity(ps, "cls.part0", 3);
  make_identity(ps, "cls.part1", 3);
  make_identity(ps, "cls.global", 3);
  const objectives::ClassificationLosses c =
      objectives::classification_losses(Var::constant(part), Var::constant(global), labels, cls);

  const double expected_part =
      -(std::log(0.7) + std::log(0.5) + std::log(0.3) + std::log(0.4)) / 4.0;
  const double expected_global = -(std::log(0.8) + std::log(0.6)) / 2.0;
  EXPECT_NEAR(c.part.value().item(), expected_part, 1e-12);
  EXPECT_NEAR(c.global.value().item(), expected_global, 1e-12);
}

TEST(Diversity, IdenticalPartsGiveOne) {
  const Var f = constant({2, 3, 2}, {1, 2, 1, 2, 1, 2, -3, 1, -3, 1, -3, 1});
  EXPECT_NEAR(objectives::diversity_loss(f).value().item(), 1.0, 1e-12);
}

TEST(Diversity, OrthogonalPartsGiveZero) {
  const Var f = constant({1, 3, 3}, {2, 0, 0, 0, 5, 0, 0, 0, 0.1});
  EXPECT_NEAR(objectives::diversity_loss(f).value().item(), 0.0, 1e-12);
}

TEST(Diversity, OpposedPairGivesMinusOne) {
  const Var f = constant({1, 2, 3}, {1, -2, 3, -1, 2, -3});
  EXPECT_NEAR(objectives::diversity_loss(f).value().item(), -1.0, 1e-12);
}

TEST(Diversity, InvariantToPartScaling) {
  Rng rng(7);
  Tensor f = normal_tensor({3, 4, 5}, 1.0, rng);
  const double before = objectives::diversity_loss(Var::constant(f)).value().item();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= 1.0 + static_cast<double>((i / 5) % 4);
  EXPECT_NEAR(objectives::diversity_loss(Var::constant(f)).value().item(), before, 1e-12);
}

TEST(Diversity, ZeroVectorIsFinite) {
  const Var f = constant({1, 2, 2}, {0, 0, 1, 0});
  const double v = objectives::diversity_loss(f).value().item();
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(v, 0.0);
}

TEST(Diversity, SinglePartRejected) {
  EXPECT_THROW(objectives::diversity_loss(constant({1, 1, 2}, {1, 0})), std::invalid_argument);
}

TEST(TotalLoss, UnitComponentsGiveEightPointSix) {
  const Var one = scalar(1.0);
  EXPECT_NEAR(objectives::combine_losses(one, one, one, one, one, {}).value().item(), 8.6, 1e-12);
  const Var zero = scalar(0.0);
  EXPECT_EQ(objectives::combine_losses(zero, zero, zero, zero, zero, {}).value().item(), 0.0);
}

TEST(TotalLoss, EqualsRecompositionOfComponents) {
  Rng rng(8);
  nn::ParameterSet ps;
  objectives::Classifiers cls(ps, "cls", 3, 4, 5, 4, rng);
  const Var part = Var::constant(normal_tensor({8, 3, 4}, 1.0, rng));
  const Var global = Var::constant(normal_tensor({8, 5}, 1.0, rng));
  const std::vector<int> labels{0, 0, 1, 1, 2, 2, 3, 3};
  const objectives::LossWeights w;
  const objectives::LossBreakdown b = objectives::total_loss(part, global, labels, cls, w);

  const objectives::TripletLosses tri = objectives::triplet_losses(part, global, labels);
  const objectives::ClassificationLosses ce = objectives::classification_losses(part, global, labels, cls);
  const double manual = 3.0 * (ce.part.value().item() + tri.part.value().item()) +
                        0.3 * (ce.global.value().item() + tri.global.value().item()) +
                        2.0 * objectives::diversity_loss(part).value().item();
  EXPECT_NEAR(b.total.value().item(), manual, 1e-9);
  EXPECT_FALSE(b.degenerate_triplets);
}

TEST(TotalLoss, SingleIdentityBatchIsFlagged) {
  Rng rng(9);
  nn::ParameterSet ps;
  objectives::Classifiers cls(ps, "cls", 2, 3, 3, 2, rng);
  const std::vector<int> labels{1, 1, 1};
  const objectives::LossBreakdown b = objectives::total_loss(
      Var::constant(normal_tensor({3, 2, 3}, 1.0, rng)), Var::constant(normal_tensor({3, 3}, 1.0, rng)), labels, cls, {});
  EXPECT_TRUE(b.degenerate_triplets);
  EXPECT_TRUE(std::isfinite(b.total.value().item()));
}
