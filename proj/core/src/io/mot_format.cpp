#include "finetrack/io/mot_format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace finetrack::io {

namespace {

std::vector<double> split_numbers(const std::string& line, int line_no) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    std::size_t a = pos, b = end;
    while (a < b && std::isspace(static_cast<unsigned char>(line[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(line[b - 1]))) --b;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data() + a, line.data() + b, v);
    if (a == b || ec != std::errc() || ptr != line.data() + b || !std::isfinite(v)) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": bad field '" + line.substr(a, b - a) + "'");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

int as_int(double v, int line_no, const char* what) {
  if (v != std::floor(v)) throw std::runtime_error("line " + std::to_string(line_no) + ": non-integer " + what);
  return static_cast<int>(v);
}

template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(split_numbers(line, line_no), line_no);
  }
}

Box parse_box(const std::vector<double>& f, int line_no) {
  if (f[4] <= 0 || f[5] <= 0) throw std::runtime_error("line " + std::to_string(line_no) + ": non-positive box size");
  return Box::from_xywh(f[2], f[3], f[4], f[5]);
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<MotRecord> parse_mot(const std::string& text) {
  std::vector<MotRecord> rows;
  for_each_line(text, [&](const std::vector<double>& f, int line_no) {
    if (f.size() < 6) throw std::runtime_error("line " + std::to_string(line_no) + ": expected at least 6 fields");
    MotRecord r;
    r.frame = as_int(f[0], line_no, "frame");
    r.id = as_int(f[1], line_no, "id");
    if (r.frame < 1) throw std::runtime_error("line " + std::to_string(line_no) + ": frame must be >= 1");
    r.box = parse_box(f, line_no);
    if (f.size() > 6) r.confidence = f[6];
    if (f.size() == 9) r.visibility = f[8];
    rows.push_back(r);
  });
  return rows;
}

std::string format_results(std::span<const MotRecord> records) {
  std::string out;
  char line[256];
  for (const MotRecord& r : records) {
    std::snprintf(line, sizeof(line), "%d,%d,%.3f,%.3f,%.3f,%.3f,%.4f,-1,-1,-1\n", r.frame, r.id, r.box.x1, r.box.y1,
                  r.box.width(), r.box.height(), r.confidence);
    out += line;
  }
  return out;
}

std::vector<DetectionRow> parse_detections(const std::string& text) {
  std::vector<DetectionRow> rows;
  std::size_t width = 0;
  for_each_line(text, [&](const std::vector<double>& f, int line_no) {
    if (f.size() < 7) throw std::runtime_error("line " + std::to_string(line_no) + ": expected at least 7 fields");
    if (f.size() > 7 && f.size() < 10) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 7 or at least 10 fields");
    }
    DetectionRow d;
    d.frame = as_int(f[0], line_no, "frame");
    if (d.frame < 1) throw std::runtime_error("line " + std::to_string(line_no) + ": frame must be >= 1");
    d.box = parse_box(f, line_no);
    d.confidence = f[6];
    d.embedding.assign(f.begin() + std::min<std::ptrdiff_t>(10, static_cast<std::ptrdiff_t>(f.size())), f.end());
    // Rows without an embedding are allowed; the others must agree in width.
    if (!d.embedding.empty()) {
      if (width != 0 && width != d.embedding.size()) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": embedding width differs from previous rows");
      }
      width = d.embedding.size();
    }
    rows.push_back(std::move(d));
  });
  return rows;
}

std::string format_detections(std::span<const DetectionRow> rows) {
  std::string out;
  char buf[256];
  for (const DetectionRow& d : rows) {
    std::snprintf(buf, sizeof(buf), "%d,-1,%.3f,%.3f,%.3f,%.3f,%.4f,-1,-1,-1", d.frame, d.box.x1, d.box.y1,
                  d.box.width(), d.box.height(), d.confidence);
    out += buf;
    for (double e : d.embedding) {
      std::snprintf(buf, sizeof(buf), ",%.17g", e);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace finetrack::io
