#include <gtest/gtest.h>

#include <map>
#include <set>

#include "finetrack/io/mot_format.hpp"
#include "finetrack/synthetic/backbone.hpp"
#include "finetrack/synthetic/roi_align.hpp"
#include "finetrack/synthetic/world.hpp"
#include "gradcheck.hpp"

using namespace finetrack;
using namespace finetrack::synth;

namespace {

SceneParams small_params(std::vector<std::array<int, 2>> crossings = {}) {
  SceneParams p;
  p.num_frames = 60;
  p.seed = 17;
  p.crossing_pairs = std::move(crossings);
  return p;
}

}  // namespace

TEST(Sequence, DeterministicUnderFixedSeed) {
  const SceneScript s = make_scene(small_params({{0, 1}}));
  const auto a = generate_sequence(s);
  const auto b = generate_sequence(s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].image, b[t].image);
    EXPECT_EQ(a[t].boxes, b[t].boxes);
    EXPECT_EQ(a[t].confidences, b[t].confidences);
  }
}

TEST(Sequence, SeedChangesPixels) {
  SceneParams p = small_params();
  p.num_frames = 2;
  const auto a = generate_sequence(make_scene(p));
  p.seed = 18;
  const auto b = generate_sequence(make_scene(p));
  EXPECT_NE(a[0].image, b[0].image);
}

TEST(Sequence, NoEventsMeansNoOverlap) {
  const SceneScript s = make_scene(small_params());
  for (const FrameRecord& f : generate_sequence(s)) {
    ASSERT_EQ(f.boxes.size(), 8u);
    for (std::size_t i = 0; i < f.boxes.size(); ++i)
      for (std::size_t j = i + 1; j < f.boxes.size(); ++j) EXPECT_EQ(iou(f.boxes[i], f.boxes[j]), 0.0);
    for (double v : f.visibility) EXPECT_EQ(v, 1.0);
  }
}

TEST(Sequence, CrossingPairOverlaps) {
  for (EventKind kind : {EventKind::kPassThrough, EventKind::kMeetAndReturn}) {
    SceneParams p = small_params({{2, 3}});
    p.crossing_kind = kind;
    p.num_frames = 100;
    const SceneScript s = make_scene(p);
    double best = 0.0;
    for (int t = 0; t < s.num_frames; ++t) {
      std::map<int, Box> boxes;
      for (const auto& [id, b] : sprite_boxes(s, t)) boxes[id] = b;
      best = std::max(best, iou(boxes.at(p.identities[2]), boxes.at(p.identities[3])));
    }
    EXPECT_GT(best, 0.3);
  }
}

TEST(Sequence, ImagesInUnitRangeAndBoxesInside) {
  const SceneScript s = make_scene(small_params({{0, 1}}));
  for (const FrameRecord& f : generate_sequence(s)) {
    EXPECT_EQ(f.image.shape(), (ad::Shape{3, 160, 320}));
    for (double v : f.image.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    for (const Box& b : f.boxes) {
      EXPECT_GE(b.x1, 0.0);
      EXPECT_GE(b.y1, 0.0);
      EXPECT_LE(b.x2, 320.0);
      EXPECT_LE(b.y2, 160.0);
    }
  }
}

TEST(Sequence, OversizedSpriteRejected) {
  SceneParams p = small_params();
  p.sprite_height = 200;
  EXPECT_THROW(generate_sequence(make_scene(p)), std::invalid_argument);
  SceneScript s = make_scene(small_params());
  s.sprite_width = 400;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Sequence, GroundTruthIsSelfConsistent) {
  const auto frames = generate_sequence(make_scene(small_params({{0, 1}})));
  std::set<int> first_ids(frames[0].ids.begin(), frames[0].ids.end());
  for (const FrameRecord& f : frames) {
    ASSERT_EQ(f.ids.size(), f.boxes.size());
    std::set<int> ids(f.ids.begin(), f.ids.end());
    EXPECT_EQ(ids.size(), f.ids.size()) << "one box per id";
    EXPECT_EQ(ids, first_ids);
    for (const Box& b : f.boxes) {
      EXPECT_NEAR(b.width(), 32.0, 1e-9);
      EXPECT_NEAR(b.height(), 64.0, 1e-9);
    }
  }
}

TEST(Sequence, MotGroundTruthFormat) {
  SceneParams p = small_params();
  p.num_frames = 2;
  const auto frames = generate_sequence(make_scene(p));
  const std::string text = mot_ground_truth(frames);
  const std::vector<MotRecord> rows = io::parse_mot(text);
  ASSERT_EQ(rows.size(), 16u);
  EXPECT_EQ(rows.front().frame, 1);
  EXPECT_EQ(rows.back().frame, 2);
  EXPECT_EQ(rows.front().id, frames[0].ids[0] + 1);
  EXPECT_NEAR(rows.front().box.x1, frames[0].boxes[0].x1, 0.005);
  EXPECT_EQ(text.substr(0, 4), "1," + std::to_string(frames[0].ids[0] + 1) + ",");
}

TEST(Appearance, ColorsInRangeAndStable) {
  for (int id = 0; id < 8; ++id) {
    const SpriteAppearance a = identity_appearance(id, 7);
    for (const Color& c : {a.head, a.upper, a.lower, a.belt})
      for (double v : c) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
  }
  const SpriteAppearance a = identity_appearance(0, 7), b = identity_appearance(0, 7);
  EXPECT_EQ(a.upper, b.upper);
}

TEST(Backbone, ShapesAtStridesEightSixteenThirtyTwo) {
  Rng rng(1);
  nn::ParameterSet ps;
  ToyBackbone net(ps, "backbone", rng);
  const auto maps = net(ad::Var::constant(normal_tensor({1, 3, 256, 128}, 1.0, rng)));
  ASSERT_EQ(maps.size(), 3u);
  EXPECT_EQ(maps[0].shape(), (ad::Shape{1, 64, 32, 16}));
  EXPECT_EQ(maps[1].shape(), (ad::Shape{1, 128, 16, 8}));
  EXPECT_EQ(maps[2].shape(), (ad::Shape{1, 256, 8, 4}));
}

TEST(Backbone, ZeroImageGivesZeroMaps) {
  Rng rng(2);
  nn::ParameterSet ps;
  ToyBackbone net(ps, "backbone", rng);
  for (const ad::Var& m : net(ad::Var::constant(ad::Tensor({1, 3, 64, 32}))))
    for (double v : m.value().data()) EXPECT_EQ(v, 0.0);
}

TEST(Backbone, RejectsBadDims) {
  Rng rng(3);
  nn::ParameterSet ps;
  ToyBackbone net(ps, "backbone", rng);
  EXPECT_THROW(net(ad::Var::constant(ad::Tensor({1, 3, 60, 32}))), std::invalid_argument);
  EXPECT_THROW(net(ad::Var::constant(ad::Tensor({1, 1, 64, 32}))), std::invalid_argument);
}

TEST(Backbone, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  nn::ParameterSet ps;
  ToyBackbone net(ps, "backbone", rng);
  const ad::Var image = finetrack::testing::random_leaf({1, 3, 32, 32}, rng);
  std::vector<ad::Var> leaves{image};
  for (const auto& [name, p] : ps.parameters()) leaves.push_back(p);
  const double err = finetrack::testing::max_gradient_error(
      [&] {
        const auto maps = net(image);
        return ad::add(finetrack::testing::random_readout(maps[0], 1), finetrack::testing::random_readout(maps[2], 2));
      },
      leaves, rng);
  EXPECT_LE(err, 1e-4);
}

TEST(RoiPyramid, GridsPerScaleCoarseFirst) {
  Rng rng(5);
  const ad::Var maps[] = {ad::Var::constant(normal_tensor({1, 4, 20, 40}, 1.0, rng)),
                          ad::Var::constant(normal_tensor({1, 5, 10, 20}, 1.0, rng)),
                          ad::Var::constant(normal_tensor({1, 6, 5, 10}, 1.0, rng))};
  const ad::RoiBox boxes[] = {{0, 10, 20, 42, 84}, {0, 100, 40, 132, 104}};
  const auto crops = roi_pyramid(maps, boxes);
  ASSERT_EQ(crops.size(), 3u);
  EXPECT_EQ(crops[0].shape(), (ad::Shape{2, 6, 4, 2}));
  EXPECT_EQ(crops[1].shape(), (ad::Shape{2, 5, 8, 4}));
  EXPECT_EQ(crops[2].shape(), (ad::Shape{2, 4, 16, 8}));
}
