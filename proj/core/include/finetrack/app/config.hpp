#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "finetrack/objectives/losses.hpp"
#include "finetrack/tracker/byte_tracker.hpp"

namespace finetrack::app {

struct SceneConfig {
  int width = 320, height = 160;
  int sprite_width = 32, sprite_height = 64;
  int num_identities = 8;
  int frames_per_video = 100;
  int train_videos = 4;
  int eval_videos = 2;
  std::uint64_t appearance_seed = 7;
  double speed = 1.5;
  double pixel_noise = 0.03;
  double brightness_jitter = 0.08;
  int clutter_rects = 6;
};

struct ModelSection {
  int unified_channels = 192;
  int num_parts = 6;
  int global_dim = 256;
  int part_dim = 128;
  int flow_kernel = 3;
  bool use_flow_alignment = true;
  bool use_part_masks = true;
  int roi_h = 16, roi_w = 8;
};

struct OptimSection {
  double learning_rate = 2e-4;
  int epochs = 20;
  int decay_epoch = 10;
  double decay_factor = 0.1;
  int batch_size = 8;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

struct TrackSection {
  int num_frames = 120;
  std::uint64_t sequence_seed = 1001;
  int crossing_pairs = 1;
  std::string crossing_kind = "meet_and_return";  // or "pass_through"
  bool degraded_detections = false;
};

struct EvalSection {
  std::string gt;       // empty: <out>/gt.txt
  std::string results;  // empty: <out>/results.txt
  int query_stride = 5;
};

struct DemoSection {
  int num_targets = 4;
};

struct IoSection {
  std::string out_dir;     // empty: $FINETRACK_OUT/<mode>, else runs/<mode>
  std::string checkpoint;  // track/demo input; train writes <out>/checkpoint.ftck
  std::string detections;  // optional MOT detection file for track
};

struct RunConfig {
  std::string mode = "train";
  std::uint64_t seed = 0;
  SceneConfig scene;
  ModelSection model;
  objectives::LossWeights loss;
  OptimSection optim;
  tracker::TrackerConfig tracker;
  TrackSection track;
  EvalSection eval;
  DemoSection demo;
  IoSection io;

  /// Throws std::invalid_argument with the offending key.
  void validate() const;
};

/// Unknown keys are rejected; missing keys keep their defaults.
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

/// "section.key=value"; value is parsed as JSON, falling back to a string.
void apply_override(RunConfig& config, const std::string& assignment);

std::filesystem::path default_output_root();
std::filesystem::path output_dir(const RunConfig& config);

}  // namespace finetrack::app
