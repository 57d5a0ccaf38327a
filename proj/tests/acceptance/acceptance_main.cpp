// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "finetrack/app/runs.hpp"
#include "finetrack/io/mot_format.hpp"
#include "finetrack/metrics/clear.hpp"
#include "finetrack/metrics/reid.hpp"
#include "finetrack/nn/fafpn.hpp"
#include "finetrack/objectives/losses.hpp"
#include "finetrack/representation/mpmg.hpp"
#include "finetrack/sampling/sgs.hpp"
#include "finetrack/tracker/byte_tracker.hpp"
#include "finetrack/tracker/distances.hpp"
#include "finetrack/tracker/hungarian.hpp"
#include "gradient_suite.hpp"
#include "oracles.hpp"

using namespace finetrack;
using ad::Tensor;
using ad::Var;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Eigen::MatrixXd rows_of(const Tensor& t) {
  Eigen::MatrixXd m(t.dim(0), t.dim(1));
  for (int i = 0; i < t.dim(0); ++i)
    for (int j = 0; j < t.dim(1); ++j) m(i, j) = t[static_cast<std::size_t>(i) * t.dim(1) + j];
  return m;
}

// ---------------------------------------------------------------------------

Outcome gradient_suite() {
  Outcome o;
  const auto start = Clock::now();
  double worst = 0.0;
  std::string worst_case;
  for (const auto& c : finetrack::testing::gradient_cases()) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const double err = c.run(seed);
      if (!(err <= worst)) {
        worst = err;
        worst_case = c.name;
      }
      o.require(err <= 1e-4, c.name + " seed " + std::to_string(seed));
    }
  }
  const double secs = seconds_since(start);
  o.require(secs < 120.0, "runtime");
  o.detail << finetrack::testing::gradient_cases().size() << " cases x 5 seeds, worst rel err " << worst << " ("
           << worst_case << "), " << secs << " s";
  return o;
}

Outcome algebraic_identities() {
  Outcome o;
  Rng rng(21);

  const Var x = Var::constant(normal_tensor({2, 4, 6, 5}, 1.0, rng));
  const double warp_err = max_abs_diff(ad::warp(x, Var::constant(Tensor({2, 2, 6, 5}))).value(), x.value());
  o.require(warp_err <= 1e-6, "zero-flow warp");

  nn::ParameterSet ps;
  nn::FlowAlign fam(ps, "fam", 4, 3, rng);
  const Var lo = Var::constant(normal_tensor({2, 4, 3, 2}, 1.0, rng));
  const Var hi = Var::constant(normal_tensor({2, 4, 6, 4}, 1.0, rng));
  const bool fam_exact = fam(lo, hi).fused.value() == ad::add(hi, nn::bilinear_upsample(lo, 6, 4)).value();
  o.require(fam_exact, "zero-init FAM equals FPN sum");

  repr::MultiHeadPartMasks mpmg(ps, "mpmg", 12, 6, rng);
  const repr::PartMasks masks = mpmg(Var::constant(normal_tensor({2, 12, 4, 2}, 1.0, rng)));
  bool max_exact = true;
  for (int n = 0; n < 2; ++n)
    for (int y = 0; y < 4; ++y)
      for (int xx = 0; xx < 2; ++xx) {
        double m = -INFINITY;
        for (int k = 0; k < 6; ++k) m = std::max(m, masks.part.value().at(n, k, y, xx));
        max_exact &= masks.global.value().at(n, 0, y, xx) == m;
      }
  o.require(max_exact, "global mask is the part max");

  const double collinear =
      objectives::diversity_loss(Var::constant(Tensor({1, 3, 2}, {1, 2, 2, 4, 0.5, 1}))).value().item();
  const double orthogonal =
      objectives::diversity_loss(Var::constant(Tensor({1, 3, 3}, {3, 0, 0, 0, 2, 0, 0, 0, 1}))).value().item();
  const double antipodal =
      objectives::diversity_loss(Var::constant(Tensor({1, 2, 3}, {1, 2, 3, -1, -2, -3}))).value().item();
  o.require(std::abs(collinear - 1) <= 1e-6 && std::abs(orthogonal) <= 1e-6 && std::abs(antipodal + 1) <= 1e-6,
            "diversity {1, 0, -1}");

  nn::ParameterSet cls_ps;
  objectives::Classifiers cls(cls_ps, "cls", 6, 8, 10, 4, rng);
  const Var part = Var::constant(normal_tensor({8, 6, 8}, 1.0, rng));
  const Var global = Var::constant(normal_tensor({8, 10}, 1.0, rng));
  const std::vector<int> labels{0, 0, 1, 1, 2, 2, 3, 3};
  const objectives::LossBreakdown b = objectives::total_loss(part, global, labels, cls, {});
  const double manual = 3 * (b.cls_part.value().item() + b.tri_part.value().item()) +
                        0.3 * (b.cls_global.value().item() + b.tri_global.value().item()) +
                        2 * b.diversity.value().item();
  const double recomposition = std::abs(b.total.value().item() - manual);
  o.require(recomposition <= 1e-9, "total loss recomposition");

  o.detail << "warp " << warp_err << ", FAM exact " << fam_exact << ", max exact " << max_exact << ", diversity ("
           << collinear << ", " << orthogonal << ", " << antipodal << "), recomposition " << recomposition;
  return o;
}

Outcome fused_distance_contract() {
  Outcome o;
  const std::vector<Box> tracks{{0, 0, 10, 10}};
  const std::vector<Box> dets{{20, 20, 30, 30}, {0, 0, 10, 10}, {5, 0, 15, 10}};
  const Eigen::MatrixXd d_iou = tracker::iou_distance(tracks, dets);
  const Eigen::MatrixXd d_feat = Eigen::RowVector3d(0.2, 0.9, 0.5);
  const tracker::DistanceMatrices m = tracker::fused_distance(d_feat, d_iou);
  o.require(m.d(0, 0) == 1.0, "disjoint gives 1");
  o.require(m.d(0, 1) == 0.0, "identical gives 0");
  const double hand = std::abs(m.d(0, 2) - std::sqrt(0.5 * 2.0 / 3.0));
  o.require(hand <= 1e-9, "hand case");

  Rng rng(31);
  bool in_range = true;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Box> a, b;
    for (int i = 0; i < 6; ++i) {
      const double x = rng.uniform(0, 60), y = rng.uniform(0, 60);
      a.push_back({x, y, x + rng.uniform(1, 30), y + rng.uniform(1, 30)});
      const double u = rng.uniform(0, 60), v = rng.uniform(0, 60);
      b.push_back({u, v, u + rng.uniform(1, 30), v + rng.uniform(1, 30)});
    }
    Eigen::MatrixXd f(6, 6);
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = rng.uniform();
    const tracker::DistanceMatrices r = tracker::fused_distance(f, tracker::iou_distance(a, b));
    in_range &= r.d.minCoeff() >= 0.0 && r.d.maxCoeff() <= 1.0;
  }
  o.require(in_range, "d in [0, 1]");
  o.detail << "d(disjoint) " << m.d(0, 0) << ", d(identical) " << m.d(0, 1) << ", hand case " << m.d(0, 2)
           << " (err " << hand << "), 200 random matrices in range " << in_range;
  return o;
}

Outcome oracles() {
  Outcome o;
  Rng rng(41);

  double hungarian_err = 0.0;
  int matrices = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 1 + static_cast<int>(rng.below(5)), cols = 1 + static_cast<int>(rng.below(5));
    Eigen::MatrixXd c(rows, cols);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = std::round(rng.uniform(0, 100)) / 4;
    const std::vector<int> assign = tracker::min_cost_assignment(c);
    double total = 0.0;
    for (int r = 0; r < rows; ++r)
      if (assign[r] >= 0) total += c(r, assign[r]);
    hungarian_err = std::max(hungarian_err, std::abs(total - finetrack::testing::brute_force_assignment_cost(c)));
    ++matrices;
  }
  // Quarter-integer costs make every total exact in floating point.
  o.require(hungarian_err == 0.0, "Hungarian total cost");

  const Box first{80, 40, 112, 104};
  tracker::KalmanState state = tracker::kalman_initiate(first);
  finetrack::testing::ReferenceKalman ref(first);
  double kalman_err = 0.0;
  for (int t = 1; t <= 50; ++t) {
    tracker::kalman_predict(state);
    ref.predict();
    if (t % 9 == 0) continue;
    const Box z{80 + 1.5 * t + rng.uniform(-1, 1), 40 + 0.5 * t + rng.uniform(-1, 1), 112 + 1.5 * t + rng.uniform(-1, 1),
                104 + 0.5 * t + rng.uniform(-1, 1)};
    tracker::kalman_update(state, z);
    ref.update(z);
    for (int i = 0; i < 8; ++i) kalman_err = std::max(kalman_err, std::abs(state.mean(i) - ref.mean()(i)));
  }
  o.require(kalman_err <= 1e-9, "Kalman trace");

  double triplet_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x = normal_tensor({12, 6}, 1.0, rng);
    std::vector<int> labels(12);
    for (int& l : labels) l = static_cast<int>(rng.below(4));
    const double got = objectives::soft_margin_triplet(Var::constant(x), labels).loss.value().item();
    triplet_err = std::max(triplet_err, std::abs(got - finetrack::testing::brute_force_triplet(rows_of(x), labels)));
  }
  o.require(triplet_err <= 1e-9, "triplet");

  double map_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    auto unit = [&] {
      Eigen::VectorXd v(8);
      for (int k = 0; k < 8; ++k) v(k) = rng.normal();
      return Eigen::VectorXd(v.normalized());
    };
    std::vector<Eigen::VectorXd> q, g;
    std::vector<int> ql, gl;
    for (int i = 0; i < 6; ++i) {
      q.push_back(unit());
      ql.push_back(i % 4);
    }
    for (int i = 0; i < 16; ++i) {
      g.push_back(unit());
      gl.push_back(i % 4);
    }
    double oracle = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
      std::vector<double> sim;
      std::vector<int> rel;
      for (std::size_t b = 0; b < g.size(); ++b) {
        sim.push_back(q[a].dot(g[b]));
        rel.push_back(gl[b] == ql[a]);
      }
      oracle += finetrack::testing::brute_force_ap(sim, rel) / static_cast<double>(q.size());
    }
    map_err = std::max(map_err, std::abs(metrics::rank1_map(q, ql, g, gl).map - oracle));
  }
  o.require(map_err <= 1e-9, "mAP");

  o.detail << "Hungarian " << matrices << " matrices max cost diff " << hungarian_err << ", Kalman " << kalman_err
           << ", triplet " << triplet_err << ", mAP " << map_err;
  return o;
}

Outcome shuffle_group_sampling() {
  Outcome o;
  std::vector<app::Video> videos;
  std::vector<int> lengths;
  for (int v = 0; v < 3; ++v) {
    synth::SceneParams p;
    p.num_frames = 30 + 7 * v;
    p.seed = 500 + v;
    videos.push_back(synth::generate_sequence(synth::make_scene(p)));
    lengths.push_back(p.num_frames);
  }
  sampling::SgsSchedule schedule;
  schedule.batch_size = 8;
  schedule.seed = 77;
  schedule.segments = sampling::build_segments(lengths, schedule.batch_size);

  int batches = 0, with_positive = 0;
  bool homogeneous = true;
  for (int epoch = 0; epoch < 3; ++epoch) {
    for (const sampling::Segment& seg : schedule.epoch(epoch)) {
      ++batches;
      const std::vector<int> frames = seg.frames();
      homogeneous &= static_cast<int>(frames.size()) == schedule.batch_size;
      std::map<int, int> count;
      for (std::size_t i = 0; i < frames.size(); ++i) {
        if (i > 0) homogeneous &= frames[i] == frames[i - 1] + 1;
        homogeneous &= frames[i] >= 0 && frames[i] < lengths[seg.video];
        for (int id : videos[seg.video][frames[i]].ids) ++count[id];
      }
      bool positive = false;
      for (const auto& [id, n] : count) positive |= n >= 2;
      with_positive += positive;
    }
  }
  o.require(homogeneous, "single-video consecutive segments");
  o.require(with_positive == batches, "every batch has a positive pair");
  const bool deterministic = schedule.epoch(1) == schedule.epoch(1) &&
                             sampling::epoch_order(schedule.segments, 123) == sampling::epoch_order(schedule.segments, 123);
  o.require(deterministic, "epoch determinism");
  o.detail << batches << " batches over 3 epochs of 3 videos, consecutive single-video " << homogeneous
           << ", with positive pair " << with_positive << "/" << batches << ", deterministic " << deterministic;
  return o;
}

// ---------------------------------------------------------------------------

struct DeskModels {
  app::RunConfig config;
  std::unique_ptr<app::ReidModel> finetrack;
};

Outcome desk_reid(DeskModels& desk) {
  Outcome o;
  desk.config = app::load_config(FINETRACK_DESK_CONFIG);
  const app::RunConfig& cfg = desk.config;
  const int frames = cfg.scene.train_videos * cfg.scene.frames_per_video;

  auto train = [&](const app::RunConfig& c, const char* label, double& secs, metrics::RetrievalResult& r,
                   double& first_epoch, double& last_epoch) {
    const auto start = Clock::now();
    app::TrainResult t = app::train_model(c);
    secs = seconds_since(start);
    r = app::evaluate_retrieval(*t.model, c);
    std::map<int, std::pair<double, int>> per_epoch;
    for (const app::LossRecord& rec : t.log) {
      per_epoch[rec.epoch].first += rec.total;
      ++per_epoch[rec.epoch].second;
    }
    first_epoch = per_epoch.begin()->second.first / per_epoch.begin()->second.second;
    last_epoch = per_epoch.rbegin()->second.first / per_epoch.rbegin()->second.second;
    std::printf("  %s: %.1f s, Rank-1 %.4f, mAP %.4f, mean loss epoch 0 %.4f -> last %.4f\n", label, secs, r.rank1,
                r.map, first_epoch, last_epoch);
    std::fflush(stdout);
    return std::move(t.model);
  };

  double ft_secs = 0, base_secs = 0, ft_first = 0, ft_last = 0, base_first = 0, base_last = 0;
  metrics::RetrievalResult ft, base;
  desk.finetrack = train(cfg, "FAFPN+MPMG", ft_secs, ft, ft_first, ft_last);
  app::RunConfig baseline = cfg;
  baseline.model.use_flow_alignment = false;
  baseline.model.use_part_masks = false;
  train(baseline, "FPN+GAP baseline", base_secs, base, base_first, base_last);

  o.require(cfg.scene.num_identities == 8 && frames == 400, "8 identities, 400 training frames");
  o.require(ft_secs < 600 && base_secs < 600, "training under 10 min");
  o.require(ft.rank1 >= 0.90, "Rank-1 >= 0.90");
  o.require(ft.map >= 0.70, "mAP >= 0.70");
  o.require(ft.rank1 >= base.rank1, "Rank-1 not below baseline");
  o.require(ft.map > base.map, "mAP above baseline");
  o.require(ft_last < ft_first && base_last < base_first, "loss decreases");
  o.detail << "FAFPN+MPMG Rank-1 " << ft.rank1 << " mAP " << ft.map << " (" << ft_secs << " s); baseline Rank-1 "
           << base.rank1 << " mAP " << base.map << " (" << base_secs << " s); " << ft.num_queries << " queries";
  return o;
}

Outcome desk_tracking(const DeskModels& desk) {
  Outcome o;
  if (!desk.finetrack) {
    o.require(false, "no trained model");
    return o;
  }
  app::RunConfig cfg = desk.config;

  cfg.track.crossing_pairs = 0;
  const app::Video plain = app::tracking_sequence(cfg);
  const metrics::ClearResult clean = metrics::clear_metrics(
      app::ground_truth_records(plain), app::track_frames(plain, desk.finetrack.get(), cfg.tracker));
  o.require(clean.idf1 == 1.0 && clean.id_switches == 0, "perfect detections without occlusion");

  cfg.track.crossing_pairs = desk.config.track.crossing_pairs;
  const app::Video crossing = app::tracking_sequence(cfg);
  const std::vector<MotRecord> gt = app::ground_truth_records(crossing);
  const metrics::ClearResult fused =
      metrics::clear_metrics(gt, app::track_frames(crossing, desk.finetrack.get(), cfg.tracker));
  tracker::TrackerConfig iou_only = cfg.tracker;
  iou_only.use_appearance = false;
  const metrics::ClearResult plain_iou = metrics::clear_metrics(gt, app::track_frames(crossing, nullptr, iou_only));
  o.require(fused.id_switches < plain_iou.id_switches, "fused IDs below IoU-only IDs");

  o.detail << "no occlusion: IDF1 " << clean.idf1 << " IDs " << clean.id_switches << "; crossing ("
           << cfg.track.crossing_pairs << " pair, " << cfg.track.crossing_kind << "): fused IDs " << fused.id_switches
           << " IDF1 " << fused.idf1 << " vs IoU-only IDs " << plain_iou.id_switches << " IDF1 " << plain_iou.idf1;
  return o;
}

Outcome end_to_end_determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "finetrack_acceptance_determinism";
  fs::remove_all(root);
  app::RunConfig cfg = app::load_config(FINETRACK_DESK_CONFIG);
  cfg.scene.frames_per_video = 24;
  cfg.scene.train_videos = 2;
  cfg.optim.epochs = 2;
  cfg.track.num_frames = 60;

  auto run_pair = [&](const std::string& name) {
    app::RunConfig train = cfg;
    train.mode = "train";
    train.io.out_dir = (root / name / "train").string();
    app::run(train);
    app::RunConfig track = cfg;
    track.mode = "track";
    track.io.out_dir = (root / name / "track").string();
    track.io.checkpoint = (root / name / "train" / "checkpoint.ftck").string();
    app::run(track);
  };
  run_pair("a");
  run_pair("b");

  int identical = 0, compared = 0;
  for (const char* file : {"train/loss_log.jsonl", "train/checkpoint.ftck", "train/sgs_schedule.json",
                           "track/gt.txt", "track/results.txt"}) {
    ++compared;
    const bool same = io::read_text_file(root / "a" / file) == io::read_text_file(root / "b" / file);
    identical += same;
    o.require(same, file);
  }
  const std::size_t rows = io::parse_mot(io::read_text_file(root / "a" / "track" / "results.txt")).size();
  o.require(rows > 0, "non-empty results");
  o.detail << identical << "/" << compared << " output files byte-identical across two train+track runs, " << rows
           << " result rows";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int index, const char* name, Outcome (*fn)()) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::printf("criterion %d (%s): %s - %s\n", index, name, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  };

  report(1, "gradient suite", gradient_suite);
  report(2, "algebraic identities", algebraic_identities);
  report(3, "fused distance", fused_distance_contract);
  report(4, "oracles", oracles);
  report(5, "shuffle-group sampling", shuffle_group_sampling);

  static DeskModels desk;
  report(6, "desk-scale re-id", [] { return desk_reid(desk); });
  report(7, "desk-scale tracking", [] { return desk_tracking(desk); });
  report(8, "end-to-end determinism", end_to_end_determinism);

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
