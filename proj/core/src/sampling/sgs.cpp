#include "finetrack/sampling/sgs.hpp"

#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

#include "finetrack/autograd/rng.hpp"

namespace finetrack::sampling {

std::vector<int> Segment::frames() const {
  std::vector<int> f(static_cast<std::size_t>(length));
  std::iota(f.begin(), f.end(), first_frame);
  return f;
}

std::vector<Segment> build_segments(std::span<const int> video_lengths, int batch_size) {
  if (batch_size < 2) {
    throw std::invalid_argument("SGS batch size must be >= 2 to contain positive pairs, got " +
                                std::to_string(batch_size));
  }
  std::vector<Segment> out;
  for (std::size_t v = 0; v < video_lengths.size(); ++v) {
    const int len = video_lengths[v];
    if (len < 0) throw std::invalid_argument("negative video length");
    for (int s = 0; s + batch_size <= len; s += batch_size) {
      out.push_back({static_cast<int>(v), s, batch_size});
    }
  }
  return out;
}

std::vector<Segment> epoch_order(std::span<const Segment> segments, std::uint64_t seed) {
  std::vector<Segment> out(segments.begin(), segments.end());
  Rng rng(seed);
  rng.shuffle(out.begin(), out.end());
  return out;
}

std::uint64_t epoch_seed(std::uint64_t run_seed, int epoch) {
  return mix_seed(run_seed, 0x5353470000ULL + static_cast<std::uint64_t>(epoch));
}

std::string schedule_dump_json(const SgsSchedule& schedule, int num_epochs) {
  nlohmann::json j;
  j["batch_size"] = schedule.batch_size;
  j["seed"] = schedule.seed;
  j["epochs"] = nlohmann::json::array();
  for (int e = 0; e < num_epochs; ++e) {
    nlohmann::json batches = nlohmann::json::array();
    for (const Segment& s : schedule.epoch(e)) {
      batches.push_back({{"video", s.video}, {"frames", s.frames()}});
    }
    j["epochs"].push_back(std::move(batches));
  }
  return j.dump(1);
}

}  // namespace finetrack::sampling
