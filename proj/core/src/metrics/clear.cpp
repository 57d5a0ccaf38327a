#include "finetrack/metrics/clear.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "finetrack/tracker/hungarian.hpp"

namespace finetrack::metrics {

namespace {

using FrameIndex = std::map<int, std::vector<const MotRecord*>>;

FrameIndex index_by_frame(std::span<const MotRecord> rows, const char* side) {
  FrameIndex out;
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MotRecord& r = rows[i];
    const std::string where = std::string(side) + " row " + std::to_string(i + 1);
    if (r.frame < 1) throw std::invalid_argument(where + ": frame must be >= 1");
    if (!r.box.valid()) throw std::invalid_argument(where + ": degenerate box");
    if (!seen.emplace(r.frame, r.id).second) {
      throw std::invalid_argument(where + ": id " + std::to_string(r.id) + " repeated in frame " +
                                  std::to_string(r.frame));
    }
    out[r.frame].push_back(&r);
  }
  return out;
}

constexpr double kForbidden = 1e6;

}  // namespace

ClearResult clear_metrics(std::span<const MotRecord> gt, std::span<const MotRecord> hyp, double iou_threshold) {
  const FrameIndex gt_frames = index_by_frame(gt, "ground truth");
  const FrameIndex hyp_frames = index_by_frame(hyp, "hypothesis");
  ClearResult res;
  res.num_gt = static_cast<int>(gt.size());
  res.num_hyp = static_cast<int>(hyp.size());
  if (res.num_gt == 0) throw std::invalid_argument("clear_metrics: no ground truth rows");

  std::set<int> frames;
  for (const auto& [f, _] : gt_frames) frames.insert(f);
  for (const auto& [f, _] : hyp_frames) frames.insert(f);

  std::map<int, int> last_match;  // gt id -> hyp id of its latest match
  std::map<std::pair<int, int>, int> co_occurrence;
  const std::vector<const MotRecord*> none;
  for (int f : frames) {
    const auto git = gt_frames.find(f);
    const auto hit = hyp_frames.find(f);
    const auto& g = git == gt_frames.end() ? none : git->second;
    const auto& h = hit == hyp_frames.end() ? none : hit->second;
    const int ng = static_cast<int>(g.size()), nh = static_cast<int>(h.size());
    Eigen::MatrixXd ious(ng, nh);
    for (int i = 0; i < ng; ++i)
      for (int j = 0; j < nh; ++j) {
        ious(i, j) = iou(g[i]->box, h[j]->box);
        if (ious(i, j) >= iou_threshold) ++co_occurrence[{g[i]->id, h[j]->id}];
      }

    std::vector<int> match(ng, -1);
    std::vector<char> hyp_used(nh, 0);
    for (int i = 0; i < ng; ++i) {
      const auto prev = last_match.find(g[i]->id);
      if (prev == last_match.end()) continue;
      for (int j = 0; j < nh; ++j) {
        if (!hyp_used[j] && h[j]->id == prev->second && ious(i, j) >= iou_threshold) {
          match[i] = j;
          hyp_used[j] = 1;
        }
      }
    }
    std::vector<int> free_g, free_h;
    for (int i = 0; i < ng; ++i)
      if (match[i] < 0) free_g.push_back(i);
    for (int j = 0; j < nh; ++j)
      if (!hyp_used[j]) free_h.push_back(j);
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(free_g.size()), static_cast<Eigen::Index>(free_h.size()));
    for (std::size_t a = 0; a < free_g.size(); ++a)
      for (std::size_t b = 0; b < free_h.size(); ++b) {
        const double v = ious(free_g[a], free_h[b]);
        cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v >= iou_threshold ? 1.0 - v : kForbidden;
      }
    const tracker::Assignment asg = tracker::hungarian_assign(cost, 1.0);
    for (const auto& [a, b] : asg.matches) match[free_g[a]] = free_h[b];

    int matched = 0;
    for (int i = 0; i < ng; ++i) {
      if (match[i] < 0) continue;
      ++matched;
      const int hid = h[match[i]]->id;
      const auto prev = last_match.find(g[i]->id);
      if (prev != last_match.end() && prev->second != hid) ++res.id_switches;
      last_match[g[i]->id] = hid;
    }
    res.matches += matched;
    res.false_negatives += ng - matched;
    res.false_positives += nh - matched;
  }
  res.mota = 1.0 - static_cast<double>(res.false_negatives + res.false_positives + res.id_switches) / res.num_gt;

  // Identity matching: one hypothesis id per ground-truth id maximizing co-occurrences.
  std::map<int, int> gt_ids, hyp_ids;
  for (const MotRecord& r : gt) gt_ids.emplace(r.id, static_cast<int>(gt_ids.size()));
  for (const MotRecord& r : hyp) hyp_ids.emplace(r.id, static_cast<int>(hyp_ids.size()));
  int idx = 0;
  for (auto& [id, i] : gt_ids) i = idx++;
  idx = 0;
  for (auto& [id, i] : hyp_ids) i = idx++;
  Eigen::MatrixXd neg(static_cast<Eigen::Index>(gt_ids.size()), static_cast<Eigen::Index>(hyp_ids.size()));
  neg.setZero();
  for (const auto& [key, count] : co_occurrence) neg(gt_ids.at(key.first), hyp_ids.at(key.second)) = -count;
  const std::vector<int> assign = tracker::min_cost_assignment(neg);
  for (std::size_t r = 0; r < assign.size(); ++r)
    if (assign[r] >= 0) res.idtp += static_cast<int>(-neg(static_cast<Eigen::Index>(r), assign[r]));
  res.idf1 = 2.0 * res.idtp / static_cast<double>(res.num_gt + res.num_hyp);
  return res;
}

}  // namespace finetrack::metrics
