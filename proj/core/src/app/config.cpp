#include "finetrack/app/config.hpp"

#include <cstdlib>
#include <json.hpp>
#include <stdexcept>

#include "finetrack/io/mot_format.hpp"

namespace finetrack::objectives {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LossWeights, alpha, beta, gamma)
}
namespace finetrack::tracker {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(KalmanParams, std_weight_position, std_weight_velocity)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrackerConfig, high_threshold, low_threshold, match_threshold,
                                                low_match_threshold, tentative_match_threshold, ema_momentum,
                                                max_age, min_hits, use_appearance, activate_first_frame, kalman)
}

namespace finetrack::app {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SceneConfig, width, height, sprite_width, sprite_height,
                                                num_identities, frames_per_video, train_videos, eval_videos,
                                                appearance_seed, speed, pixel_noise, brightness_jitter, clutter_rects)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ModelSection, unified_channels, num_parts, global_dim, part_dim,
                                                flow_kernel, use_flow_alignment, use_part_masks, roi_h, roi_w)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(OptimSection, learning_rate, epochs, decay_epoch, decay_factor,
                                                batch_size, beta1, beta2, eps)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrackSection, num_frames, sequence_seed, crossing_pairs,
                                                crossing_kind, degraded_detections)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EvalSection, gt, results, query_stride)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DemoSection, num_targets)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(IoSection, out_dir, checkpoint, detections)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, mode, seed, scene, model, loss, optim, tracker, track, eval,
                                                demo, io)

namespace {

using nlohmann::json;

void check_keys(const json& user, const json& reference, const std::string& prefix) {
  if (!user.is_object()) return;
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!reference.contains(key)) throw std::invalid_argument("unknown config key '" + path + "'");
    if (reference.at(key).is_object()) {
      if (!value.is_object()) throw std::invalid_argument("config key '" + path + "' must be an object");
      check_keys(value, reference.at(key), path);
    }
  }
}

RunConfig from_checked_json(const json& j) {
  check_keys(j, json(RunConfig{}), "");
  RunConfig cfg;
  try {
    cfg = j.get<RunConfig>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("config: " + what);
}

}  // namespace

void RunConfig::validate() const {
  require(mode == "train" || mode == "track" || mode == "eval" || mode == "demo", "mode must be train|track|eval|demo");
  require(scene.num_identities >= 2, "scene.num_identities must be >= 2");
  require(scene.frames_per_video >= 0 && scene.train_videos >= 1 && scene.eval_videos >= 1, "scene video counts");
  require(model.num_parts >= 1 && model.unified_channels % model.num_parts == 0,
          "model.unified_channels must be divisible by model.num_parts");
  require(model.global_dim > 0 && model.part_dim > 0 && model.flow_kernel % 2 == 1, "model dimensions");
  require(model.roi_h >= 4 && model.roi_w >= 4 && model.roi_h % 4 == 0 && model.roi_w % 4 == 0,
          "model.roi_h and model.roi_w must be positive multiples of 4");
  require(optim.learning_rate > 0 && optim.epochs >= 1 && optim.batch_size >= 2, "optim settings");
  require(track.num_frames >= 0, "track.num_frames must be >= 0");
  require(track.crossing_kind == "meet_and_return" || track.crossing_kind == "pass_through",
          "track.crossing_kind must be meet_and_return|pass_through");
  require(eval.query_stride >= 1 && demo.num_targets >= 1, "eval/demo settings");
  require(io.checkpoint.empty() || std::filesystem::exists(io.checkpoint),
          "checkpoint '" + io.checkpoint + "' does not exist");
  require(io.detections.empty() || std::filesystem::exists(io.detections),
          "detections '" + io.detections + "' does not exist");
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  return from_checked_json(j);
}

RunConfig load_config(const std::filesystem::path& path) { return config_from_json(io::read_text_file(path)); }

std::string config_to_json(const RunConfig& config) { return json(config).dump(2) + "\n"; }

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json j = config;
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw std::invalid_argument("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw std::invalid_argument("config key '" + key + "' is a section");
  if (node->is_string() && !value.is_string()) value = raw;
  *node = value;
  config = from_checked_json(j);
}

std::filesystem::path default_output_root() {
  const char* env = std::getenv("FINETRACK_OUT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("runs");
}

std::filesystem::path output_dir(const RunConfig& config) {
  return config.io.out_dir.empty() ? default_output_root() / config.mode : std::filesystem::path(config.io.out_dir);
}

}  // namespace finetrack::app
