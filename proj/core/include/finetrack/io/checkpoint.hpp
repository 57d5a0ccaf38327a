#pragma once

#include <filesystem>
#include <string>

#include "finetrack/nn/parameters.hpp"

namespace finetrack::io {

/// Binary layout, little-endian:
///   "FTCKPT\0\0" | u32 version | u32 meta_len | meta (JSON text) | u64 count |
///   count x { u32 name_len | name | u32 ndim | i64 dims[ndim] | f64 data[] }
constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nn::StateDict tensors;
  std::string meta;  // JSON text
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Throws std::runtime_error on a missing, truncated or foreign file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace finetrack::io
