#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace finetrack::sampling {

/// A run of consecutive frames from one video; one segment is one batch.
struct Segment {
  int video = 0;
  int first_frame = 0;  // 0-based index within the video
  int length = 0;

  std::vector<int> frames() const;
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Cuts every video independently into floor(len / B) segments of exactly
/// B consecutive frames; the remainder of each video is dropped.
/// Throws std::invalid_argument when B < 2 or a length is negative.
std::vector<Segment> build_segments(std::span<const int> video_lengths, int batch_size);

/// Deterministic shuffle of whole segments (segment contents untouched).
std::vector<Segment> epoch_order(std::span<const Segment> segments, std::uint64_t seed);

/// Seed of epoch `epoch` derived from the run seed.
std::uint64_t epoch_seed(std::uint64_t run_seed, int epoch);

struct SgsSchedule {
  int batch_size = 8;
  std::uint64_t seed = 0;
  std::vector<Segment> segments;  // unshuffled

  std::vector<Segment> epoch(int index) const { return epoch_order(segments, epoch_seed(seed, index)); }
};

/// JSON audit dump: {"batch_size", "seed", "epochs": [[{"video", "frames": [...]}, ...], ...]}.
std::string schedule_dump_json(const SgsSchedule& schedule, int num_epochs);

}  // namespace finetrack::sampling
