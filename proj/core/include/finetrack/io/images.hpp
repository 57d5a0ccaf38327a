#pragma once

#include <filesystem>

#include "finetrack/autograd/tensor.hpp"

namespace finetrack::io {

/// (3, H, W) in [0, 1] as binary PPM; values are clamped.
void write_ppm(const std::filesystem::path& path, const ad::Tensor& rgb);
/// (H, W) in [0, 1] as binary PGM; values are clamped.
void write_pgm(const std::filesystem::path& path, const ad::Tensor& gray);
/// (H, W) mapped through a blue-to-red color ramp over [lo, hi] as PPM.
void write_heatmap(const std::filesystem::path& path, const ad::Tensor& values, double lo, double hi);

/// NumPy .npy (format 1.0, little-endian float64, C order).
void write_npy(const std::filesystem::path& path, const ad::Tensor& t);
ad::Tensor read_npy(const std::filesystem::path& path);

}  // namespace finetrack::io
