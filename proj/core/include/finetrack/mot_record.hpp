#pragma once

#include "finetrack/box.hpp"

namespace finetrack {

/// One row of a MOT-Challenge style file. `frame` and `id` are 1-based as
/// written on disk.
struct MotRecord {
  int frame = 1;
  int id = -1;
  Box box;
  double confidence = 1.0;
  double visibility = 1.0;

  friend bool operator==(const MotRecord&, const MotRecord&) = default;
};

}  // namespace finetrack
