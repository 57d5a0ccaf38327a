#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "finetrack/mot_record.hpp"

namespace finetrack::io {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Ground truth or tracker results: frame,id,x,y,w,h[,conf[,class|x[,vis|y[,z]]]].
/// Blank lines are skipped. Throws std::runtime_error("line N: ...") on a
/// malformed row.
std::vector<MotRecord> parse_mot(const std::string& text);

/// Tracker results: frame,id,x,y,w,h,conf,-1,-1,-1.
std::string format_results(std::span<const MotRecord> records);

struct DetectionRow {
  int frame = 1;
  Box box;
  double confidence = 1.0;
  std::vector<double> embedding;  // optional trailing columns
};

/// frame,-1,x,y,w,h,conf[,-1,-1,-1[,e_0,...,e_{D-1}]].
std::vector<DetectionRow> parse_detections(const std::string& text);
std::string format_detections(std::span<const DetectionRow> rows);

}  // namespace finetrack::io
