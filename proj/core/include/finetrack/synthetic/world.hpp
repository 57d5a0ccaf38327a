#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "finetrack/autograd/tensor.hpp"
#include "finetrack/box.hpp"

namespace finetrack::synth {

using Color = std::array<double, 3>;

/// Per-identity look. Identities are described by spatially separated color
/// regions (head, upper body, lower body, a belt band) so that part-level
/// cues exist; the appearance of an identity is the same in every video.
struct SpriteAppearance {
  Color head, upper, lower, belt;
  int belt_row = 0;  // belt band offset within the upper body, in sprite rows / 8
  double texture_phase = 0.0;
};

SpriteAppearance identity_appearance(int identity, std::uint64_t appearance_seed);

/// Reflecting 1-D motion: position(t) = reflect(start + velocity * t) on [lo, hi].
struct AxisMotion {
  double start = 0, velocity = 0, lo = 0, hi = 0;
  double at(int frame) const;
};

/// Path of a sprite's top-left corner plus its presence interval.
struct SpritePath {
  int identity = 0;  // global identity label (0-based)
  AxisMotion x, y;
  int first_frame = 0;
  int last_frame = -1;  // inclusive; -1 = until the end
};

enum class EventKind { kPassThrough, kMeetAndReturn };

/// Two sprites sharing a lane whose boxes coincide at `peak_frame`.
struct OcclusionEvent {
  int sprite_a = 0, sprite_b = 0;  // indices into SceneScript::sprites
  int peak_frame = 0;
  EventKind kind = EventKind::kPassThrough;
};

struct SceneScript {
  int width = 320, height = 160;
  int sprite_width = 32, sprite_height = 64;
  int num_frames = 100;
  std::uint64_t seed = 1;
  std::uint64_t appearance_seed = 7;
  std::vector<SpritePath> sprites;  // drawn in order; later sprites occlude earlier ones
  std::vector<OcclusionEvent> occlusions;  // sorted by peak_frame
  double pixel_noise = 0.03;
  double brightness_jitter = 0.08;
  int clutter_rects = 6;
  bool degraded_detections = false;

  /// Throws std::invalid_argument on an impossible script.
  void validate() const;
};

struct SceneParams {
  int width = 320, height = 160;
  int sprite_width = 32, sprite_height = 64;
  int num_frames = 100;
  std::uint64_t seed = 1;
  std::uint64_t appearance_seed = 7;
  std::vector<int> identities{0, 1, 2, 3, 4, 5, 6, 7};
  /// Pairs (by position in `identities`) that share a lane and cross.
  std::vector<std::array<int, 2>> crossing_pairs;
  EventKind crossing_kind = EventKind::kPassThrough;
  double speed = 1.5;  // pixels per frame
  double pixel_noise = 0.03;
  double brightness_jitter = 0.08;
  int clutter_rects = 6;
  bool degraded_detections = false;
};

/// Lays sprites out in disjoint cells of a grid (so boxes never overlap)
/// and merges two adjacent cells into a shared lane for each crossing pair.
SceneScript make_scene(const SceneParams& params);

struct FrameRecord {
  int index = 0;  // 0-based
  ad::Tensor image;  // (3, H, W) in [0, 1]
  std::vector<Box> boxes;  // ground truth
  std::vector<int> ids;    // global identity labels
  std::vector<double> visibility;
  /// Detector view of the frame: equal to the ground truth unless the
  /// script asks for degraded detections.
  std::vector<Box> detection_boxes;
  std::vector<double> confidences;
};

std::vector<FrameRecord> generate_sequence(const SceneScript& script);

/// Ground-truth boxes of one frame without rendering.
std::vector<std::pair<int, Box>> sprite_boxes(const SceneScript& script, int frame);

/// MOT-Challenge ground truth: frame,id,x,y,w,h,conf,class,vis (1-based frame and id).
std::string mot_ground_truth(const std::vector<FrameRecord>& frames);

}  // namespace finetrack::synth
