#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "finetrack/app/model.hpp"
#include "finetrack/metrics/clear.hpp"
#include "finetrack/metrics/reid.hpp"
#include "finetrack/sampling/sgs.hpp"
#include "finetrack/synthetic/world.hpp"

namespace finetrack::app {

using Video = std::vector<synth::FrameRecord>;

synth::SceneParams scene_params(const SceneConfig& scene, std::uint64_t video_seed);
/// Videos with every identity present throughout and no crossings.
std::vector<Video> training_videos(const RunConfig& config);
std::vector<Video> evaluation_videos(const RunConfig& config);
/// Tracking scene from the `track` section; crossing partners are drawn
/// from different color pairs.
Video tracking_sequence(const RunConfig& config);

struct LossRecord {
  int step = 0, epoch = 0;
  double cls_p = 0, tri_p = 0, cls_g = 0, tri_g = 0, div = 0, total = 0;
};
std::string loss_record_json(const LossRecord& record);

struct TrainResult {
  std::unique_ptr<ReidModel> model;
  std::vector<LossRecord> log;
  sampling::SgsSchedule schedule;
};

/// Throws std::runtime_error naming the step on a non-finite loss.
TrainResult train_model(const RunConfig& config, const std::function<void(const LossRecord&)>& on_step = {});

/// Cross-video retrieval on the evaluation videos: the first video supplies
/// queries and the others the gallery, every `eval.query_stride` frames.
metrics::RetrievalResult evaluate_retrieval(const ReidModel& model, const RunConfig& config);

/// Runs the tracker over the detector view of `frames`. With a model,
/// high-score detections are embedded; without one, appearance is off.
std::vector<MotRecord> track_frames(const Video& frames, const ReidModel* model, tracker::TrackerConfig config);
std::vector<MotRecord> ground_truth_records(const Video& frames);

/// Model rebuilt from a checkpoint written by run_train.
std::unique_ptr<ReidModel> load_model(const std::filesystem::path& checkpoint);
void save_model(const std::filesystem::path& checkpoint, const ReidModel& model, const RunConfig& config);

std::string metrics_table(const metrics::ClearResult& clear, const metrics::RetrievalResult* retrieval);
std::string metrics_key_values(const metrics::ClearResult& clear, const metrics::RetrievalResult* retrieval);

struct RunSummary {
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> files;
  std::string message;
};

RunSummary run_train(const RunConfig& config);
RunSummary run_track(const RunConfig& config);
RunSummary run_eval(const RunConfig& config);
RunSummary run_demo(const RunConfig& config);
RunSummary run(const RunConfig& config);

}  // namespace finetrack::app
