#include "finetrack/app/runs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <stdexcept>

#include "finetrack/app/optimizer.hpp"
#include "finetrack/io/checkpoint.hpp"
#include "finetrack/io/images.hpp"
#include "finetrack/io/mot_format.hpp"
#include "finetrack/tracker/distances.hpp"

namespace finetrack::app {

namespace fs = std::filesystem;

namespace {

Video generate(const synth::SceneParams& p) { return synth::generate_sequence(synth::make_scene(p)); }

fs::path prepare_out_dir(const RunConfig& cfg) {
  const fs::path out = output_dir(cfg);
  fs::create_directories(out);
  io::write_text_file(out / "config.json", config_to_json(cfg));
  return out;
}

std::vector<const ad::Tensor*> frame_images(const Video& v) {
  std::vector<const ad::Tensor*> out;
  for (const synth::FrameRecord& f : v) out.push_back(&f.image);
  return out;
}

// Backbone maps of every frame, computed a few frames at a time.
std::vector<FeaturePyramid> backbone_cache(const ReidModel& model, const Video& video) {
  constexpr std::size_t kChunk = 4;
  const std::vector<const ad::Tensor*> images = frame_images(video);
  std::vector<FeaturePyramid> out;
  for (std::size_t first = 0; first < images.size(); first += kChunk) {
    const std::size_t n = std::min(kChunk, images.size() - first);
    const FeaturePyramid batch = model.backbone(stack_batch(std::span(images).subspan(first, n)));
    for (std::size_t i = 0; i < n; ++i) {
      FeaturePyramid one;
      for (const ad::Tensor& t : batch) {
        const std::size_t per = t.size() / n;
        ad::Tensor slice({1, t.dim(1), t.dim(2), t.dim(3)});
        std::copy(t.ptr() + i * per, t.ptr() + (i + 1) * per, slice.ptr());
        one.push_back(std::move(slice));
      }
      out.push_back(std::move(one));
    }
  }
  return out;
}

FeaturePyramid stack_pyramids(const std::vector<const FeaturePyramid*>& frames) {
  FeaturePyramid out;
  for (std::size_t s = 0; s < frames.front()->size(); ++s) {
    std::vector<const ad::Tensor*> items;
    for (const FeaturePyramid* f : frames) items.push_back(&(*f)[s]);
    out.push_back(stack_batch(items));
  }
  return out;
}

ad::Tensor upscale_nearest(const ad::Tensor& hw, int factor) {
  const int h = hw.dim(0), w = hw.dim(1);
  ad::Tensor out({h * factor, w * factor});
  for (int y = 0; y < h * factor; ++y)
    for (int x = 0; x < w * factor; ++x) out[static_cast<std::size_t>(y) * w * factor + x] = hw[(y / factor) * w + x / factor];
  return out;
}

ad::Tensor plane(const ad::Tensor& t, int n, int c) {
  const int h = t.dim(2), w = t.dim(3);
  ad::Tensor out({h, w});
  const std::size_t off = (static_cast<std::size_t>(n) * t.dim(1) + c) * h * w;
  std::copy(t.ptr() + off, t.ptr() + off + static_cast<std::size_t>(h) * w, out.ptr());
  return out;
}

ad::Tensor crop_image(const ad::Tensor& img, const Box& b, int out_h, int out_w) {
  const int H = img.dim(1), W = img.dim(2);
  ad::Tensor out({3, out_h, out_w});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < out_h; ++y)
      for (int x = 0; x < out_w; ++x) {
        const int sx = std::clamp(static_cast<int>(b.x1 + (x + 0.5) * b.width() / out_w), 0, W - 1);
        const int sy = std::clamp(static_cast<int>(b.y1 + (y + 0.5) * b.height() / out_h), 0, H - 1);
        out[(static_cast<std::size_t>(c) * out_h + y) * out_w + x] = img[(static_cast<std::size_t>(c) * H + sy) * W + sx];
      }
  return out;
}

ad::Tensor matrix_tensor(const Eigen::MatrixXd& m) {
  ad::Tensor t({static_cast<int>(m.rows()), static_cast<int>(m.cols())});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  return t;
}

}  // namespace

synth::SceneParams scene_params(const SceneConfig& s, std::uint64_t video_seed) {
  synth::SceneParams p;
  p.width = s.width;
  p.height = s.height;
  p.sprite_width = s.sprite_width;
  p.sprite_height = s.sprite_height;
  p.num_frames = s.frames_per_video;
  p.seed = video_seed;
  p.appearance_seed = s.appearance_seed;
  p.identities.clear();
  for (int i = 0; i < s.num_identities; ++i) p.identities.push_back(i);
  p.speed = s.speed;
  p.pixel_noise = s.pixel_noise;
  p.brightness_jitter = s.brightness_jitter;
  p.clutter_rects = s.clutter_rects;
  return p;
}

std::vector<Video> training_videos(const RunConfig& cfg) {
  std::vector<Video> out;
  for (int v = 0; v < cfg.scene.train_videos; ++v)
    out.push_back(generate(scene_params(cfg.scene, mix_seed(cfg.seed, 100 + static_cast<std::uint64_t>(v)))));
  return out;
}

std::vector<Video> evaluation_videos(const RunConfig& cfg) {
  std::vector<Video> out;
  for (int v = 0; v < cfg.scene.eval_videos; ++v)
    out.push_back(generate(scene_params(cfg.scene, mix_seed(cfg.seed, 200 + static_cast<std::uint64_t>(v)))));
  return out;
}

Video tracking_sequence(const RunConfig& cfg) {
  synth::SceneParams p = scene_params(cfg.scene, mix_seed(cfg.seed, cfg.track.sequence_seed));
  p.num_frames = cfg.track.num_frames;
  const int m = cfg.scene.num_identities, half = (m + 1) / 2;
  p.identities.clear();
  for (int i = 0; i < m; ++i) p.identities.push_back(i % 2 == 0 ? i / 2 : half + i / 2);
  for (int j = 0; j < cfg.track.crossing_pairs; ++j) p.crossing_pairs.push_back({2 * j, 2 * j + 1});
  p.crossing_kind =
      cfg.track.crossing_kind == "pass_through" ? synth::EventKind::kPassThrough : synth::EventKind::kMeetAndReturn;
  p.degraded_detections = cfg.track.degraded_detections;
  return generate(p);
}

std::string loss_record_json(const LossRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "{\"step\":%d,\"epoch\":%d,\"cls_p\":%.17g,\"tri_p\":%.17g,\"cls_g\":%.17g,\"tri_g\":%.17g,"
                "\"div\":%.17g,\"total\":%.17g}",
                r.step, r.epoch, r.cls_p, r.tri_p, r.cls_g, r.tri_g, r.div, r.total);
  return buf;
}

TrainResult train_model(const RunConfig& cfg, const std::function<void(const LossRecord&)>& on_step) {
  TrainResult result;
  result.model = std::make_unique<ReidModel>(model_config(cfg), cfg.seed);
  ReidModel& model = *result.model;
  const std::vector<Video> videos = training_videos(cfg);
  std::vector<std::vector<FeaturePyramid>> cache;
  std::vector<int> lengths;
  for (const Video& v : videos) {
    cache.push_back(backbone_cache(model, v));
    lengths.push_back(static_cast<int>(v.size()));
  }
  result.schedule.batch_size = cfg.optim.batch_size;
  result.schedule.seed = mix_seed(cfg.seed, 5);
  result.schedule.segments = sampling::build_segments(lengths, cfg.optim.batch_size);

  Adam adam(model.trainable(), {cfg.optim.beta1, cfg.optim.beta2, cfg.optim.eps});
  int step = 0;
  for (int epoch = 0; epoch < cfg.optim.epochs; ++epoch) {
    const double lr = step_decay(cfg.optim.learning_rate, epoch, cfg.optim.decay_epoch, cfg.optim.decay_factor);
    for (const sampling::Segment& seg : result.schedule.epoch(epoch)) {
      std::vector<const FeaturePyramid*> frames;
      std::vector<ad::RoiBox> rois;
      std::vector<int> labels;
      for (int b = 0; b < seg.length; ++b) {
        const int f = seg.first_frame + b;
        frames.push_back(&cache[seg.video][f]);
        const synth::FrameRecord& rec = videos[seg.video][f];
        for (std::size_t k = 0; k < rec.boxes.size(); ++k) {
          const Box& box = rec.boxes[k];
          rois.push_back({b, box.x1, box.y1, box.x2, box.y2});
          labels.push_back(rec.ids[k]);
        }
      }
      const ModelForward fwd = model.forward(stack_pyramids(frames), rois, true);
      const objectives::LossBreakdown loss = objectives::total_loss(
          fwd.embeddings.part, fwd.embeddings.global, labels, model.classifiers(), cfg.loss);
      LossRecord rec{step,
                     epoch,
                     loss.value(loss.cls_part),
                     loss.value(loss.tri_part),
                     loss.value(loss.cls_global),
                     loss.value(loss.tri_global),
                     loss.value(loss.diversity),
                     loss.value(loss.total)};
      if (!std::isfinite(rec.total)) {
        throw std::runtime_error("training diverged: non-finite loss at step " + std::to_string(step));
      }
      model.trainable().zero_grad();
      ad::backward(loss.total);
      adam.step(lr);
      result.log.push_back(rec);
      if (on_step) on_step(rec);
      ++step;
    }
  }
  return result;
}

metrics::RetrievalResult evaluate_retrieval(const ReidModel& model, const RunConfig& cfg) {
  const std::vector<Video> videos = evaluation_videos(cfg);
  std::vector<Eigen::VectorXd> query, gallery;
  std::vector<int> query_labels, gallery_labels;
  auto collect = [&](const Video& v, std::size_t first, std::size_t last, std::vector<Eigen::VectorXd>& embs,
                     std::vector<int>& labels) {
    for (std::size_t f = first; f < last; f += static_cast<std::size_t>(cfg.eval.query_stride)) {
      const std::vector<Eigen::VectorXd> d = model.describe(v[f].image, v[f].boxes);
      embs.insert(embs.end(), d.begin(), d.end());
      labels.insert(labels.end(), v[f].ids.begin(), v[f].ids.end());
    }
  };
  if (videos.size() == 1) {
    collect(videos[0], 0, videos[0].size() / 2, query, query_labels);
    collect(videos[0], videos[0].size() / 2, videos[0].size(), gallery, gallery_labels);
  } else {
    collect(videos[0], 0, videos[0].size(), query, query_labels);
    for (std::size_t v = 1; v < videos.size(); ++v) collect(videos[v], 0, videos[v].size(), gallery, gallery_labels);
  }
  return metrics::rank1_map(query, query_labels, gallery, gallery_labels);
}

std::vector<MotRecord> track_frames(const Video& frames, const ReidModel* model, tracker::TrackerConfig tcfg) {
  if (!model) tcfg.use_appearance = false;
  tracker::ByteTracker trk(tcfg);
  std::vector<MotRecord> out;
  for (const synth::FrameRecord& fr : frames) {
    std::vector<tracker::Detection> dets;
    std::vector<Box> high_boxes;
    std::vector<std::size_t> high_index;
    for (std::size_t k = 0; k < fr.detection_boxes.size(); ++k) {
      dets.push_back({fr.detection_boxes[k], fr.confidences[k], {}});
      if (fr.confidences[k] >= tcfg.high_threshold) {
        high_boxes.push_back(fr.detection_boxes[k]);
        high_index.push_back(k);
      }
    }
    if (tcfg.use_appearance) {
      const std::vector<Eigen::VectorXd> embs = model->describe(fr.image, high_boxes);
      for (std::size_t i = 0; i < high_index.size(); ++i) dets[high_index[i]].embedding = embs[i];
    }
    for (const tracker::TrackOutput& o : trk.step(dets)) out.push_back({fr.index + 1, o.id, o.box, o.score, 1.0});
  }
  return out;
}

std::vector<MotRecord> ground_truth_records(const Video& frames) {
  std::vector<MotRecord> out;
  for (const synth::FrameRecord& fr : frames)
    for (std::size_t k = 0; k < fr.boxes.size(); ++k)
      out.push_back({fr.index + 1, fr.ids[k] + 1, fr.boxes[k], 1.0, fr.visibility[k]});
  return out;
}

void save_model(const fs::path& checkpoint, const ReidModel& model, const RunConfig& cfg) {
  nlohmann::json meta;
  meta["format"] = "finetrack";
  meta["config"] = nlohmann::json::parse(config_to_json(cfg));
  // Paths say where a run wrote, not what the model is.
  meta["config"].erase("io");
  io::save_checkpoint(checkpoint, {model.state_dict(), meta.dump()});
}

std::unique_ptr<ReidModel> load_model(const fs::path& checkpoint) {
  const io::Checkpoint ck = io::load_checkpoint(checkpoint);
  const nlohmann::json meta = nlohmann::json::parse(ck.meta, nullptr, false);
  if (meta.is_discarded() || !meta.contains("config")) {
    throw std::runtime_error(checkpoint.string() + ": checkpoint metadata lacks the training config");
  }
  nlohmann::json cfg_json = meta["config"];
  cfg_json.erase("io");
  const RunConfig cfg = config_from_json(cfg_json.dump());
  auto model = std::make_unique<ReidModel>(model_config(cfg), cfg.seed);
  model->load_state_dict(ck.tensors);
  return model;
}

std::string metrics_table(const metrics::ClearResult& c, const metrics::RetrievalResult* r) {
  char buf[1024];
  std::snprintf(buf, sizeof(buf),
                "%-8s %-8s %-5s %-6s %-6s %-6s %-6s\n%-8.4f %-8.4f %-5d %-6d %-6d %-6d %-6d\n", "MOTA", "IDF1",
                "IDs", "FP", "FN", "GT", "Hyp", c.mota, c.idf1, c.id_switches, c.false_positives, c.false_negatives,
                c.num_gt, c.num_hyp);
  std::string out = buf;
  if (r) {
    std::snprintf(buf, sizeof(buf), "\n%-8s %-8s %-8s\n%-8.4f %-8.4f %-8d\n", "Rank-1", "mAP", "queries", r->rank1,
                  r->map, r->num_queries);
    out += buf;
  }
  return out;
}

std::string metrics_key_values(const metrics::ClearResult& c, const metrics::RetrievalResult* r) {
  char buf[1024];
  std::snprintf(buf, sizeof(buf),
                "mota=%.17g\nidf1=%.17g\nid_switches=%d\nfalse_positives=%d\nfalse_negatives=%d\nnum_gt=%d\n"
                "num_hyp=%d\n",
                c.mota, c.idf1, c.id_switches, c.false_positives, c.false_negatives, c.num_gt, c.num_hyp);
  std::string out = buf;
  if (r) {
    std::snprintf(buf, sizeof(buf), "rank1=%.17g\nmap=%.17g\nnum_queries=%d\n", r->rank1, r->map, r->num_queries);
    out += buf;
  }
  return out;
}

RunSummary run_train(const RunConfig& cfg) {
  RunSummary s;
  s.out_dir = prepare_out_dir(cfg);
  const fs::path log_path = s.out_dir / "loss_log.jsonl";
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write " + log_path.string());
  int last_epoch = -1;
  TrainResult result = train_model(cfg, [&](const LossRecord& r) {
    log << loss_record_json(r) << '\n';
    if (r.epoch != last_epoch) {
      std::fprintf(stderr, "epoch %d: total %.4f\n", r.epoch, r.total);
      last_epoch = r.epoch;
    }
  });
  log.close();
  const fs::path ck = s.out_dir / "checkpoint.ftck";
  save_model(ck, *result.model, cfg);
  io::write_text_file(s.out_dir / "sgs_schedule.json", sampling::schedule_dump_json(result.schedule, cfg.optim.epochs));
  s.files = {s.out_dir / "config.json", log_path, ck, s.out_dir / "sgs_schedule.json"};
  if (!result.log.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu steps, total loss %.4f -> %.4f", result.log.size(), result.log.front().total,
                  result.log.back().total);
    s.message = buf;
  } else {
    s.message = "no training steps (videos shorter than one batch)";
  }
  return s;
}

RunSummary run_track(const RunConfig& cfg) {
  RunSummary s;
  s.out_dir = prepare_out_dir(cfg);
  std::unique_ptr<ReidModel> model;
  if (!cfg.io.checkpoint.empty()) model = load_model(cfg.io.checkpoint);
  std::vector<MotRecord> results;

  if (!cfg.io.detections.empty()) {
    const std::vector<io::DetectionRow> rows = io::parse_detections(io::read_text_file(cfg.io.detections));
    const bool has_embeddings = !rows.empty() && !rows.front().embedding.empty();
    tracker::TrackerConfig tcfg = cfg.tracker;
    if (tcfg.use_appearance && !has_embeddings) {
      throw std::runtime_error("detections file has no embedding columns; set tracker.use_appearance=false");
    }
    std::map<int, std::vector<tracker::Detection>> by_frame;
    int last_frame = 0;
    for (const io::DetectionRow& r : rows) {
      tracker::Detection d{r.box, r.confidence, {}};
      if (tcfg.use_appearance) {
        d.embedding = Eigen::Map<const Eigen::VectorXd>(r.embedding.data(), static_cast<Eigen::Index>(r.embedding.size()));
        d.embedding = repr::l2_normalized(d.embedding);
      }
      by_frame[r.frame].push_back(std::move(d));
      last_frame = std::max(last_frame, r.frame);
    }
    tracker::ByteTracker trk(tcfg);
    for (int f = 1; f <= last_frame; ++f) {
      for (const tracker::TrackOutput& o : trk.step(by_frame[f])) results.push_back({f, o.id, o.box, o.score, 1.0});
    }
  } else {
    if (cfg.tracker.use_appearance && !model) {
      throw std::runtime_error("appearance tracking needs --checkpoint (or set tracker.use_appearance=false)");
    }
    const Video frames = tracking_sequence(cfg);
    io::write_text_file(s.out_dir / "gt.txt", synth::mot_ground_truth(frames));
    s.files.push_back(s.out_dir / "gt.txt");
    results = track_frames(frames, model.get(), cfg.tracker);
  }
  for (const MotRecord& r : results) {
    if (!std::isfinite(r.box.x1) || !std::isfinite(r.box.y1) || !std::isfinite(r.box.x2) || !std::isfinite(r.box.y2)) {
      throw std::runtime_error("tracker produced a non-finite box in frame " + std::to_string(r.frame));
    }
  }
  io::write_text_file(s.out_dir / "results.txt", io::format_results(results));
  s.files.push_back(s.out_dir / "results.txt");
  s.message = std::to_string(results.size()) + " result rows";
  return s;
}

RunSummary run_eval(const RunConfig& cfg) {
  RunSummary s;
  const fs::path track_dir = default_output_root() / "track";
  const fs::path gt_path = cfg.eval.gt.empty() ? track_dir / "gt.txt" : fs::path(cfg.eval.gt);
  const fs::path res_path = cfg.eval.results.empty() ? track_dir / "results.txt" : fs::path(cfg.eval.results);
  const std::vector<MotRecord> gt = io::parse_mot(io::read_text_file(gt_path));
  const std::vector<MotRecord> hyp = io::parse_mot(io::read_text_file(res_path));
  const metrics::ClearResult clear = metrics::clear_metrics(gt, hyp);
  std::optional<metrics::RetrievalResult> retrieval;
  if (!cfg.io.checkpoint.empty()) retrieval = evaluate_retrieval(*load_model(cfg.io.checkpoint), cfg);
  s.out_dir = prepare_out_dir(cfg);
  const metrics::RetrievalResult* r = retrieval ? &*retrieval : nullptr;
  s.message = metrics_table(clear, r);
  io::write_text_file(s.out_dir / "metrics.txt", s.message);
  io::write_text_file(s.out_dir / "metrics.kv", metrics_key_values(clear, r));
  s.files = {s.out_dir / "config.json", s.out_dir / "metrics.txt", s.out_dir / "metrics.kv"};
  return s;
}

RunSummary run_demo(const RunConfig& cfg) {
  if (cfg.io.checkpoint.empty()) throw std::runtime_error("demo needs --checkpoint");
  const std::unique_ptr<ReidModel> model = load_model(cfg.io.checkpoint);
  RunSummary s;
  s.out_dir = prepare_out_dir(cfg);
  synth::SceneParams p = scene_params(cfg.scene, mix_seed(cfg.seed, 200));
  p.num_frames = std::max(2, std::min(cfg.scene.frames_per_video, 11));
  const Video video = generate(p);
  const synth::FrameRecord& first = video.front();
  const synth::FrameRecord& last = video.back();
  const int n = std::min<int>(cfg.demo.num_targets, static_cast<int>(first.boxes.size()));
  if (n == 0) throw std::runtime_error("demo scene has no targets");
  const std::vector<Box> boxes(first.boxes.begin(), first.boxes.begin() + n);

  ad::NoGradGuard no_grad;
  const ad::Tensor& img = first.image;
  const FeaturePyramid pyramid = model->backbone(img.reshaped({1, img.dim(0), img.dim(1), img.dim(2)}));
  std::vector<ad::RoiBox> rois;
  for (const Box& b : boxes) rois.push_back({0, b.x1, b.y1, b.x2, b.y2});
  const ModelForward fwd = model->forward(pyramid, rois, false);
  const fs::path mask_dir = s.out_dir / "masks";
  auto add = [&](const fs::path& p) { s.files.push_back(p); };
  io::write_ppm(s.out_dir / "frame.ppm", img);
  add(s.out_dir / "frame.ppm");
  if (fwd.embeddings.masks.part) {
    const ad::Tensor& masks = fwd.embeddings.masks.part.value();
    io::write_npy(s.out_dir / "masks.npy", masks);
    add(s.out_dir / "masks.npy");
    const int K = masks.dim(1);
    const int scale = std::max(1, 64 / masks.dim(2));
    for (int t = 0; t < n; ++t) {
      char name[64];
      std::snprintf(name, sizeof(name), "target%02d_crop.ppm", t);
      io::write_ppm(mask_dir / name, crop_image(img, boxes[t], masks.dim(2) * scale, masks.dim(3) * scale));
      add(mask_dir / name);
      for (int k = 0; k < K; ++k) {
        std::snprintf(name, sizeof(name), "target%02d_part%d.pgm", t, k);
        io::write_pgm(mask_dir / name, upscale_nearest(plane(masks, t, k), scale));
        add(mask_dir / name);
      }
      std::snprintf(name, sizeof(name), "target%02d_global.pgm", t);
      io::write_pgm(mask_dir / name, upscale_nearest(plane(fwd.embeddings.masks.global.value(), t, 0), scale));
      add(mask_dir / name);
    }
  }
  for (std::size_t st = 0; st < fwd.fafpn.stages.size(); ++st) {
    for (const auto& [label, flow] : {std::pair{"down", fwd.fafpn.stages[st].flow_down},
                                      std::pair{"up", fwd.fafpn.stages[st].flow_up}}) {
      const ad::Tensor& f = flow.value();
      ad::Tensor mag({f.dim(2), f.dim(3)});
      const ad::Tensor dx = plane(f, 0, 0), dy = plane(f, 0, 1);
      double peak = 0.0;
      for (std::size_t i = 0; i < mag.size(); ++i) {
        mag[i] = std::hypot(dx[i], dy[i]);
        peak = std::max(peak, mag[i]);
      }
      if (peak > 0) for (std::size_t i = 0; i < mag.size(); ++i) mag[i] /= peak;
      char name[64];
      std::snprintf(name, sizeof(name), "flow_stage%zu_%s.pgm", st, label);
      io::write_pgm(s.out_dir / name, upscale_nearest(mag, 8));
      add(s.out_dir / name);
    }
  }
  const std::vector<Eigen::VectorXd> a = model->describe(first.image, first.boxes);
  const std::vector<Eigen::VectorXd> b = model->describe(last.image, last.boxes);
  const tracker::DistanceMatrices dm = tracker::fused_distance(tracker::feature_distance(a, b),
                                                               tracker::iou_distance(first.boxes, last.boxes));
  for (const auto& [name, m] : {std::pair{"distance_feat.ppm", dm.d_feat}, std::pair{"distance_iou.ppm", dm.d_iou},
                                std::pair{"distance_fused.ppm", dm.d}}) {
    io::write_heatmap(s.out_dir / name, upscale_nearest(matrix_tensor(m), 16), 0.0, 1.0);
    add(s.out_dir / name);
  }
  s.message = std::to_string(s.files.size()) + " files";
  return s;
}

RunSummary run(const RunConfig& cfg) {
  if (cfg.mode == "train") return run_train(cfg);
  if (cfg.mode == "track") return run_track(cfg);
  if (cfg.mode == "eval") return run_eval(cfg);
  if (cfg.mode == "demo") return run_demo(cfg);
  throw std::invalid_argument("unknown mode " + cfg.mode);
}

}  // namespace finetrack::app
