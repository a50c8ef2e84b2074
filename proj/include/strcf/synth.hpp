#pragma once

// Deterministic synthetic OTB-style sequences: a textured square over a
// textured background with known motion.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "strcf/eval.hpp"
#include "strcf/image_io.hpp"

namespace strcf {

enum class SynthKind { Static, Translate, Scale, Occlude };

inline SynthKind parse_synth_kind(const std::string& s) {
  if (s == "static") return SynthKind::Static;
  if (s == "translate") return SynthKind::Translate;
  if (s == "scale") return SynthKind::Scale;
  if (s == "occlude") return SynthKind::Occlude;
  throw Error(ErrorKind::Config, "unknown synthetic kind '" + s + "'");
}

struct SynthSpec {
  SynthKind kind = SynthKind::Translate;
  int frames = 50;
  std::uint64_t seed = 1;
  int width = 320;
  int height = 240;
  int target_size = 48;
};

struct SynthSequence {
  std::vector<Image> frames;
  std::vector<Box> truth;  // 0-indexed
};

namespace detail {

/// Uniform in [0, 1) from the top 53 bits, identical across standard libraries.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// RGB texture of `block`-pixel tiles with random colors in [lo, hi].
struct Texture {
  int w = 0, h = 0;
  std::vector<std::uint8_t> rgb;

  Texture(std::mt19937_64& rng, int width, int height, int block, int lo, int hi) : w(width), h(height) {
    const int bw = (width + block - 1) / block, bh = (height + block - 1) / block;
    std::vector<std::uint8_t> tiles(static_cast<std::size_t>(bw) * bh * 3);
    for (auto& t : tiles) t = static_cast<std::uint8_t>(lo + static_cast<int>(unit(rng) * (hi - lo + 1)));
    rgb.resize(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c)
          rgb[(static_cast<std::size_t>(y) * w + x) * 3 + c] =
              tiles[(static_cast<std::size_t>(y / block) * bw + x / block) * 3 + c];
  }

  std::uint8_t at(int x, int y, int c) const { return rgb[(static_cast<std::size_t>(y) * w + x) * 3 + c]; }
};

/// Paints `tex` stretched over the continuous box (nearest-neighbor lookup).
inline void paint(Image& img, const Texture& tex, const Box& box) {
  const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
  const int x1 = std::min(img.width, static_cast<int>(std::ceil(box.x + box.w)));
  const int y1 = std::min(img.height, static_cast<int>(std::ceil(box.y + box.h)));
  for (int y = y0; y < y1; ++y) {
    const double py = y + 0.5;
    if (py < box.y || py >= box.y + box.h) continue;
    const int ty = std::min(tex.h - 1, static_cast<int>((py - box.y) / box.h * tex.h));
    for (int x = x0; x < x1; ++x) {
      const double px = x + 0.5;
      if (px < box.x || px >= box.x + box.w) continue;
      const int tx = std::min(tex.w - 1, static_cast<int>((px - box.x) / box.w * tex.w));
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = tex.at(tx, ty, c);
    }
  }
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace detail

/// Motion per kind: static stays put; translate moves +2 px/frame in x;
/// scale grows the target by x1.005/frame about a fixed center; occlude moves
/// the target +1 px/frame while a textured bar sweeps across it around the
/// middle of the sequence.
inline SynthSequence generate_synthetic(const SynthSpec& spec) {
  if (spec.frames < 2) throw Error(ErrorKind::Config, "synthetic sequences need at least 2 frames");
  std::mt19937_64 rng(spec.seed);
  const detail::Texture background(rng, spec.width, spec.height, 16, 70, 180);
  const detail::Texture target(rng, spec.target_size, spec.target_size, 8, 0, 255);
  const int occ_w = spec.target_size + spec.target_size / 3;
  const int occ_h = spec.target_size * 2;
  const detail::Texture occluder(rng, occ_w, occ_h, 6, 20, 235);

  const double s0 = spec.target_size;
  const double start_x = spec.kind == SynthKind::Translate ? 40.0 : 0.5 * (spec.width - s0);
  const double start_y = 0.5 * (spec.height - s0);
  const double center_x = start_x + 0.5 * s0, center_y = start_y + 0.5 * s0;

  SynthSequence seq;
  for (int t = 0; t < spec.frames; ++t) {
    Box box{start_x, start_y, s0, s0};
    switch (spec.kind) {
      case SynthKind::Static: break;
      case SynthKind::Translate: box.x = start_x + 2.0 * t; break;
      case SynthKind::Scale: {
        const double s = s0 * std::pow(1.005, t);
        box = {center_x - 0.5 * s, center_y - 0.5 * s, s, s};
        break;
      }
      case SynthKind::Occlude: box.x = start_x - 0.5 * spec.frames + t; break;
    }

    Image img(spec.width, spec.height, 3);
    img.data = background.rgb;
    detail::paint(img, target, box);
    if (spec.kind == SynthKind::Occlude) {
      // The bar's center meets the target's center at the middle frame,
      // closing at 5 px/frame relative to the target.
      const double mid = 0.5 * (spec.frames - 1);
      const double target_cx_mid = start_x - 0.5 * spec.frames + mid + 0.5 * s0;
      const double bar_cx = target_cx_mid - 4.0 * (t - mid);
      detail::paint(img, occluder, {bar_cx - 0.5 * occ_w, center_y - 0.5 * occ_h, double(occ_w), double(occ_h)});
    }
    seq.frames.push_back(std::move(img));
    seq.truth.push_back(box);
  }
  return seq;
}

/// Writes img/0001.png... and groundtruth_rect.txt (1-indexed, comma separated).
inline void write_otb(const std::filesystem::path& dir, const SynthSequence& seq) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "img", ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + (dir / "img").string() + ": " + ec.message());
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%04zu.png", i + 1);
    save_png(dir / "img" / name, seq.frames[i]);
  }
  std::ofstream gt(dir / kGroundTruthFile);
  if (!gt) throw Error(ErrorKind::Io, "cannot write " + (dir / kGroundTruthFile).string());
  for (const auto& b : seq.truth)
    gt << detail::format_number(b.x + 1.0) << ',' << detail::format_number(b.y + 1.0) << ','
       << detail::format_number(b.w) << ',' << detail::format_number(b.h) << '\n';
  if (!gt) throw Error(ErrorKind::Io, "write failed: " + (dir / kGroundTruthFile).string());
}

}  // namespace strcf
