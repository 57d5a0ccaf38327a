#include "finetrack/io/images.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <stdexcept>
#include <string>

namespace finetrack::io {

namespace {

unsigned char to_byte(double v) { return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

std::ofstream open_binary(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const ad::Tensor& rgb) {
  if (rgb.rank() != 3 || rgb.dim(0) != 3) throw std::invalid_argument("write_ppm: expected (3, H, W)");
  const int h = rgb.dim(1), w = rgb.dim(2);
  std::ofstream out = open_binary(path);
  out << "P6\n" << w << " " << h << "\n255\n";
  std::string px(static_cast<std::size_t>(h) * w * 3, '\0');
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        px[(static_cast<std::size_t>(y) * w + x) * 3 + c] =
            static_cast<char>(to_byte(rgb[(static_cast<std::size_t>(c) * h + y) * w + x]));
  out.write(px.data(), static_cast<std::streamsize>(px.size()));
}

void write_pgm(const std::filesystem::path& path, const ad::Tensor& gray) {
  if (gray.rank() != 2) throw std::invalid_argument("write_pgm: expected (H, W)");
  std::ofstream out = open_binary(path);
  out << "P5\n" << gray.dim(1) << " " << gray.dim(0) << "\n255\n";
  std::string px(gray.size(), '\0');
  for (std::size_t i = 0; i < gray.size(); ++i) px[i] = static_cast<char>(to_byte(gray[i]));
  out.write(px.data(), static_cast<std::streamsize>(px.size()));
}

void write_heatmap(const std::filesystem::path& path, const ad::Tensor& values, double lo, double hi) {
  if (values.rank() != 2) throw std::invalid_argument("write_heatmap: expected (H, W)");
  const int h = values.dim(0), w = values.dim(1);
  ad::Tensor rgb({3, h, w});
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double t = std::clamp((values[i] - lo) / span, 0.0, 1.0);
    rgb[i] = t;
    rgb[values.size() + i] = 1.0 - std::abs(2.0 * t - 1.0);
    rgb[2 * values.size() + i] = 1.0 - t;
  }
  write_ppm(path, rgb);
}

void write_npy(const std::filesystem::path& path, const ad::Tensor& t) {
  std::string shape = "(";
  for (int d : t.shape()) shape += std::to_string(d) + ", ";
  if (t.rank() > 1) shape.erase(shape.size() - 2);
  else if (t.rank() == 1) shape.erase(shape.size() - 1);
  shape += ")";
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': " + shape + ", }";
  const std::size_t total = 10 + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header += '\n';
  std::ofstream out = open_binary(path);
  out.write("\x93NUMPY\x01\x00", 8);
  const auto len = static_cast<std::uint16_t>(header.size());
  out.put(static_cast<char>(len & 0xFF));
  out.put(static_cast<char>(len >> 8));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(t.ptr()), static_cast<std::streamsize>(t.size() * sizeof(double)));
}

ad::Tensor read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char magic[10];
  in.read(magic, 10);
  if (!in || std::string(magic, 6) != "\x93NUMPY" || magic[6] != 1) {
    throw std::runtime_error(path.string() + ": not a version 1 .npy file");
  }
  const std::size_t len = static_cast<unsigned char>(magic[8]) | (static_cast<unsigned char>(magic[9]) << 8);
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  if (header.find("'<f8'") == std::string::npos || header.find("'fortran_order': False") == std::string::npos) {
    throw std::runtime_error(path.string() + ": only C-order little-endian float64 is supported");
  }
  std::smatch m;
  if (!std::regex_search(header, m, std::regex(R"('shape': \(([^)]*)\))"))) {
    throw std::runtime_error(path.string() + ": missing shape");
  }
  ad::Shape shape;
  const std::string dims = m[1];
  const std::regex num(R"(\d+)");
  for (auto it = std::sregex_iterator(dims.begin(), dims.end(), num); it != std::sregex_iterator(); ++it) {
    shape.push_back(std::stoi(it->str()));
  }
  ad::Tensor t(shape);
  in.read(reinterpret_cast<char*>(t.ptr()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != t.size() * sizeof(double)) {
    throw std::runtime_error(path.string() + ": truncated data");
  }
  return t;
}

}  // namespace finetrack::io
