#include "finetrack/synthetic/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "finetrack/autograd/rng.hpp"

namespace finetrack::synth {

namespace {

constexpr std::array<Color, 6> kPalette{{
    {0.85, 0.15, 0.15},  // red
    {0.15, 0.70, 0.20},  // green
    {0.15, 0.25, 0.85},  // blue
    {0.90, 0.80, 0.15},  // yellow
    {0.80, 0.20, 0.75},  // magenta
    {0.15, 0.75, 0.80},  // cyan
}};

// Color pairs for identities 2p and 2p+1; the second identity of a pair
// swaps upper and lower colors, so the pair differs only in layout.
constexpr std::array<std::array<int, 2>, 8> kPairs{{{0, 1}, {2, 3}, {4, 5}, {1, 4}, {0, 2}, {3, 5}, {1, 3}, {2, 4}}};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

Color jitter(Color c, Rng& rng, double amount) {
  for (double& v : c) v = clamp01(v + rng.uniform(-amount, amount));
  return c;
}

struct Background {
  ad::Tensor pixels;  // (3, H, W), static part of the scene
};

Background render_background(const SceneScript& s) {
  Rng rng(mix_seed(s.seed, 0xB6));
  Background bg{ad::Tensor({3, s.height, s.width})};
  const Color base{rng.uniform(0.3, 0.6), rng.uniform(0.3, 0.6), rng.uniform(0.3, 0.6)};
  const double gx = rng.uniform(-0.15, 0.15), gy = rng.uniform(-0.15, 0.15);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        const double shade = gx * (static_cast<double>(x) / s.width - 0.5) + gy * (static_cast<double>(y) / s.height - 0.5);
        bg.pixels[(static_cast<std::size_t>(c) * s.height + y) * s.width + x] = clamp01(base[c] + shade);
      }
  // Static clutter drawn from the sprite palette.
  for (int r = 0; r < s.clutter_rects; ++r) {
    const Color col = jitter(kPalette[rng.below(kPalette.size())], rng, 0.05);
    const int w = 6 + static_cast<int>(rng.below(20)), h = 6 + static_cast<int>(rng.below(20));
    const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, s.width - w))));
    const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, s.height - h))));
    for (int c = 0; c < 3; ++c)
      for (int y = y0; y < std::min(s.height, y0 + h); ++y)
        for (int x = x0; x < std::min(s.width, x0 + w); ++x)
          bg.pixels[(static_cast<std::size_t>(c) * s.height + y) * s.width + x] = col[c];
  }
  return bg;
}

// Sprite color at normalized local coordinates; returns false where the
// silhouette is transparent.
bool sprite_color(const SpriteAppearance& a, double u, double v, Color& out) {
  if (v < 0.2) {
    if (u < 0.3 || u > 0.7) return false;
    out = a.head;
    return true;
  }
  if (v < 0.6) {
    const double belt_top = 0.44 + 0.02 * a.belt_row;
    if (v >= belt_top && v < belt_top + 0.07) {
      out = a.belt;
      return true;
    }
    const double tex = 1.0 + 0.15 * std::sin(2.0 * std::numbers::pi * (3.0 * u + a.texture_phase));
    for (int c = 0; c < 3; ++c) out[c] = clamp01(a.upper[c] * tex);
    return true;
  }
  if (u > 0.42 && u < 0.58) return false;  // gap between the legs
  out = a.lower;
  return true;
}

}  // namespace

SpriteAppearance identity_appearance(int identity, std::uint64_t appearance_seed) {
  if (identity < 0) throw std::invalid_argument("identity must be non-negative");
  Rng rng(mix_seed(appearance_seed, static_cast<std::uint64_t>(identity)));
  SpriteAppearance a;
  const int pair = identity / 2;
  if (pair < static_cast<int>(kPairs.size())) {
    const auto [first, second] = kPairs[static_cast<std::size_t>(pair)];
    const bool swapped = identity % 2 == 1;
    a.upper = kPalette[static_cast<std::size_t>(swapped ? second : first)];
    a.lower = kPalette[static_cast<std::size_t>(swapped ? first : second)];
    a.belt = kPalette[static_cast<std::size_t>((pair + 3) % kPalette.size())];
    a.belt_row = pair % 3;
  } else {
    a.upper = kPalette[rng.below(kPalette.size())];
    a.lower = kPalette[rng.below(kPalette.size())];
    a.belt = kPalette[rng.below(kPalette.size())];
    a.belt_row = static_cast<int>(rng.below(3));
  }
  Rng pair_rng(mix_seed(appearance_seed, 0x1000 + static_cast<std::uint64_t>(pair)));
  a.head = {pair_rng.uniform(0.7, 0.95), pair_rng.uniform(0.55, 0.75), pair_rng.uniform(0.4, 0.6)};
  a.upper = jitter(a.upper, rng, 0.04);
  a.lower = jitter(a.lower, rng, 0.04);
  a.texture_phase = pair_rng.uniform();
  return a;
}

double AxisMotion::at(int frame) const {
  const double span = hi - lo;
  const double s = start + velocity * frame;
  if (span <= 0) return lo;
  const double period = 2.0 * span;
  double m = std::fmod(s - lo, period);
  if (m < 0) m += period;
  return m <= span ? lo + m : hi - (m - span);
}

void SceneScript::validate() const {
  if (width < 32 || height < 32 || width % 32 != 0 || height % 32 != 0) {
    throw std::invalid_argument("scene image size must be a positive multiple of 32");
  }
  if (sprite_width < 4 || sprite_height < 4 || sprite_width > width || sprite_height > height) {
    throw std::invalid_argument("sprite " + std::to_string(sprite_width) + "x" + std::to_string(sprite_height) +
                                " does not fit the " + std::to_string(width) + "x" + std::to_string(height) +
                                " image");
  }
  if (num_frames < 0) throw std::invalid_argument("negative frame count");
  for (std::size_t i = 0; i < sprites.size(); ++i) {
    const SpritePath& p = sprites[i];
    if (p.x.lo < 0 || p.x.hi + sprite_width > width || p.y.lo < 0 || p.y.hi + sprite_height > height ||
        p.x.hi < p.x.lo || p.y.hi < p.y.lo) {
      throw std::invalid_argument("sprite path " + std::to_string(i) + " leaves the image");
    }
    for (std::size_t j = 0; j < i; ++j)
      if (sprites[j].identity == p.identity) throw std::invalid_argument("duplicate identity in scene");
  }
  int last_peak = -1;
  for (const OcclusionEvent& e : occlusions) {
    if (e.sprite_a < 0 || e.sprite_b < 0 || e.sprite_a >= static_cast<int>(sprites.size()) ||
        e.sprite_b >= static_cast<int>(sprites.size()) || e.sprite_a == e.sprite_b) {
      throw std::invalid_argument("occlusion event refers to unknown sprites");
    }
    if (e.peak_frame < last_peak) throw std::invalid_argument("occlusion events are not ordered in time");
    last_peak = e.peak_frame;
  }
}

SceneScript make_scene(const SceneParams& p) {
  SceneScript s;
  s.width = p.width;
  s.height = p.height;
  s.sprite_width = p.sprite_width;
  s.sprite_height = p.sprite_height;
  s.num_frames = p.num_frames;
  s.seed = p.seed;
  s.appearance_seed = p.appearance_seed;
  s.pixel_noise = p.pixel_noise;
  s.brightness_jitter = p.brightness_jitter;
  s.clutter_rects = p.clutter_rects;
  s.degraded_detections = p.degraded_detections;

  const int n = static_cast<int>(p.identities.size());
  if (n == 0) {
    s.validate();
    return s;
  }
  const int rows = std::max(1, p.height / (p.sprite_height + 8));
  int cols = (n + rows - 1) / rows;
  if (!p.crossing_pairs.empty() && cols % 2 == 1) ++cols;
  const double cell_w = static_cast<double>(p.width) / cols;
  const double cell_h = static_cast<double>(p.height) / rows;
  if (cell_w < p.sprite_width || cell_h < p.sprite_height) {
    throw std::invalid_argument("scene too crowded: " + std::to_string(n) + " sprites of " +
                                std::to_string(p.sprite_width) + "x" + std::to_string(p.sprite_height) +
                                " do not fit a " + std::to_string(p.width) + "x" + std::to_string(p.height) +
                                " image");
  }
  if (static_cast<int>(p.crossing_pairs.size()) * 2 > rows * cols) throw std::invalid_argument("too many crossing pairs");

  Rng rng(mix_seed(p.seed, 0x5CE7E));
  std::vector<int> cell_of(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(rows * cols), false);
  int next_pair_cell = 0;
  for (const auto& pr : p.crossing_pairs) {
    if (pr[0] < 0 || pr[1] < 0 || pr[0] >= n || pr[1] >= n || pr[0] == pr[1] ||
        cell_of[static_cast<std::size_t>(pr[0])] >= 0 || cell_of[static_cast<std::size_t>(pr[1])] >= 0) {
      throw std::invalid_argument("invalid crossing pair");
    }
    cell_of[static_cast<std::size_t>(pr[0])] = next_pair_cell;
    cell_of[static_cast<std::size_t>(pr[1])] = next_pair_cell + 1;
    used[static_cast<std::size_t>(next_pair_cell)] = used[static_cast<std::size_t>(next_pair_cell + 1)] = true;
    next_pair_cell += 2;
  }
  int free_cell = 0;
  for (int i = 0; i < n; ++i) {
    if (cell_of[static_cast<std::size_t>(i)] >= 0) continue;
    while (used[static_cast<std::size_t>(free_cell)]) ++free_cell;
    if (free_cell >= rows * cols) throw std::invalid_argument("scene too crowded");
    cell_of[static_cast<std::size_t>(i)] = free_cell;
    used[static_cast<std::size_t>(free_cell)] = true;
  }

  const double sw = p.sprite_width, sh = p.sprite_height;
  s.sprites.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int cell = cell_of[static_cast<std::size_t>(i)];
    const double x0 = (cell % cols) * cell_w, y0 = (cell / cols) * cell_h;
    SpritePath& path = s.sprites[static_cast<std::size_t>(i)];
    path.identity = p.identities[static_cast<std::size_t>(i)];
    path.x.lo = std::ceil(x0);
    path.x.hi = std::floor(x0 + cell_w - sw);
    path.y.lo = std::ceil(y0);
    path.y.hi = std::floor(y0 + cell_h - sh);
    path.x.start = rng.uniform(path.x.lo, path.x.hi);
    path.y.start = rng.uniform(path.y.lo, path.y.hi);
    path.x.velocity = (rng.uniform() < 0.5 ? -1.0 : 1.0) * p.speed * rng.uniform(0.5, 1.0);
    path.y.velocity = (rng.uniform() < 0.5 ? -1.0 : 1.0) * p.speed * 0.3 * rng.uniform(0.5, 1.0);
  }

  const int lo_peak = static_cast<int>(0.3 * p.num_frames), hi_peak = std::max(lo_peak, static_cast<int>(0.7 * p.num_frames));
  for (const auto& pr : p.crossing_pairs) {
    SpritePath& a = s.sprites[static_cast<std::size_t>(pr[0])];
    SpritePath& b = s.sprites[static_cast<std::size_t>(pr[1])];
    const int cell = cell_of[static_cast<std::size_t>(pr[0])];
    const double lane_left = std::ceil((cell % cols) * cell_w);
    const double lane_right = std::floor((cell % cols + 2) * cell_w);
    const double row_top = (cell / cols) * cell_h;
    const double meet = std::round(0.5 * (lane_left + lane_right) - 0.5 * sw);
    const int peak = lo_peak + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi_peak - lo_peak + 1)));
    const double v = p.speed;
    const double y = std::floor(row_top + 0.5 * (cell_h - sh));
    const double y_offset = std::min(4.0, std::floor(row_top + cell_h - sh - y));
    a.y = {y, 0.0, y, y};
    b.y = {y + y_offset, 0.0, y + y_offset, y + y_offset};
    if (p.crossing_kind == EventKind::kPassThrough) {
      a.x = {meet - v * peak, v, lane_left, lane_right - sw};
      b.x = {meet + v * peak, -v, lane_left, lane_right - sw};
    } else {
      a.x = {meet - v * peak, v, lane_left, meet};
      b.x = {meet + v * peak, -v, meet, lane_right - sw};
    }
    s.occlusions.push_back({pr[0], pr[1], peak, p.crossing_kind});
  }
  std::sort(s.occlusions.begin(), s.occlusions.end(),
            [](const OcclusionEvent& l, const OcclusionEvent& r) { return l.peak_frame < r.peak_frame; });
  s.validate();
  return s;
}

std::vector<std::pair<int, Box>> sprite_boxes(const SceneScript& script, int frame) {
  std::vector<std::pair<int, Box>> out;
  for (const SpritePath& p : script.sprites) {
    if (frame < p.first_frame || (p.last_frame >= 0 && frame > p.last_frame)) continue;
    const double x = p.x.at(frame), y = p.y.at(frame);
    out.emplace_back(p.identity, Box{x, y, x + script.sprite_width, y + script.sprite_height});
  }
  return out;
}

std::vector<FrameRecord> generate_sequence(const SceneScript& script) {
  script.validate();
  const Background bg = render_background(script);
  const int W = script.width, H = script.height;
  std::vector<SpriteAppearance> looks;
  for (const SpritePath& p : script.sprites) looks.push_back(identity_appearance(p.identity, script.appearance_seed));

  std::vector<FrameRecord> frames;
  frames.reserve(static_cast<std::size_t>(script.num_frames));
  for (int t = 0; t < script.num_frames; ++t) {
    Rng rng(mix_seed(script.seed, 0xF000000ULL + static_cast<std::uint64_t>(t)));
    FrameRecord fr;
    fr.index = t;
    fr.image = bg.pixels;
    const auto boxes = sprite_boxes(script, t);

    // Sprites in script order; later ones occlude earlier ones.
    std::size_t look = 0;
    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < script.sprites.size(); ++i) {
      const SpritePath& p = script.sprites[i];
      if (t < p.first_frame || (p.last_frame >= 0 && t > p.last_frame)) continue;
      present.push_back(i);
    }
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      look = present[k];
      const Box& b = boxes[k].second;
      const int px0 = std::max(0, static_cast<int>(std::floor(b.x1)));
      const int py0 = std::max(0, static_cast<int>(std::floor(b.y1)));
      const int px1 = std::min(W, static_cast<int>(std::ceil(b.x2)));
      const int py1 = std::min(H, static_cast<int>(std::ceil(b.y2)));
      for (int y = py0; y < py1; ++y) {
        for (int x = px0; x < px1; ++x) {
          const double u = (x + 0.5 - b.x1) / b.width(), v = (y + 0.5 - b.y1) / b.height();
          if (u < 0 || u >= 1 || v < 0 || v >= 1) continue;
          Color c;
          if (!sprite_color(looks[look], u, v, c)) continue;
          for (int ch = 0; ch < 3; ++ch) fr.image[(static_cast<std::size_t>(ch) * H + y) * W + x] = c[ch];
        }
      }
    }

    const double gain = 1.0 + rng.uniform(-script.brightness_jitter, script.brightness_jitter);
    for (double& v : fr.image.data()) v = clamp01(v * gain + script.pixel_noise * rng.normal());

    for (std::size_t k = 0; k < boxes.size(); ++k) {
      const Box& b = boxes[k].second;
      fr.ids.push_back(boxes[k].first);
      fr.boxes.push_back(b);
      // Box-level visibility against every sprite drawn later.
      double covered = 0.0;
      const int samples = 16;
      for (int sy = 0; sy < samples; ++sy)
        for (int sx = 0; sx < samples; ++sx) {
          const double x = b.x1 + (sx + 0.5) * b.width() / samples, y = b.y1 + (sy + 0.5) * b.height() / samples;
          for (std::size_t j = k + 1; j < boxes.size(); ++j) {
            const Box& o = boxes[j].second;
            if (x >= o.x1 && x < o.x2 && y >= o.y1 && y < o.y2) {
              covered += 1.0;
              break;
            }
          }
        }
      const double vis = 1.0 - covered / (samples * samples);
      fr.visibility.push_back(vis);

      if (!script.degraded_detections) {
        fr.detection_boxes.push_back(b);
        fr.confidences.push_back(rng.uniform(0.9, 1.0));
      } else {
        const double jx = 0.04 * b.width(), jy = 0.04 * b.height();
        Box d{b.x1 + jx * rng.normal(), b.y1 + jy * rng.normal(), b.x2 + jx * rng.normal(), b.y2 + jy * rng.normal()};
        d.x1 = std::clamp(d.x1, 0.0, W - 1.0);
        d.y1 = std::clamp(d.y1, 0.0, H - 1.0);
        d.x2 = std::clamp(d.x2, d.x1 + 1.0, static_cast<double>(W));
        d.y2 = std::clamp(d.y2, d.y1 + 1.0, static_cast<double>(H));
        fr.detection_boxes.push_back(d);
        fr.confidences.push_back(vis >= 0.6 ? rng.uniform(0.5, 1.0) : rng.uniform(0.1, 0.6));
      }
    }
    frames.push_back(std::move(fr));
  }
  return frames;
}

std::string mot_ground_truth(const std::vector<FrameRecord>& frames) {
  std::string out;
  char line[256];
  for (const FrameRecord& fr : frames) {
    for (std::size_t k = 0; k < fr.boxes.size(); ++k) {
      const Box& b = fr.boxes[k];
      std::snprintf(line, sizeof(line), "%d,%d,%.2f,%.2f,%.2f,%.2f,1,1,%.4f\n", fr.index + 1, fr.ids[k] + 1, b.x1,
                    b.y1, b.width(), b.height(), fr.visibility[k]);
      out += line;
    }
  }
  return out;
}

}  // namespace finetrack::synth
