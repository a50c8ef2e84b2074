#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "strcf/grid.hpp"
#include "strcf/image.hpp"

namespace strcf {

/// Axis-aligned region in continuous pixel coordinates; pixel (x, y) has its
/// center at (x, y).
struct Region {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;

  friend bool operator==(const Region&, const Region&) = default;
};

enum class WindowKind { Cosine, None };
/// Only HOG is implemented; the enum leaves room for other descriptors.
enum class FeatureKind { Hog };

struct FeatureConfig {
  int cell_size = 4;
  int orientation_bins = 9;
  bool include_gray = true;
  WindowKind window = WindowKind::Cosine;
  FeatureKind kind = FeatureKind::Hog;

  void validate() const {
    if (cell_size < 1) throw Error(ErrorKind::Config, "cell_size must be >= 1");
    if (orientation_bins < 2) throw Error(ErrorKind::Config, "orientation_bins must be >= 2");
  }

  int channels() const noexcept { return orientation_bins + (include_gray ? 1 : 0); }

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Square region with the same center and side sqrt(area_factor * W * H).
inline Region search_region(const Region& target, double area_factor = 5.0) {
  if (!(target.width > 0.0) || !(target.height > 0.0))
    throw Error(ErrorKind::EmptyRegion, "target must have positive area");
  const double side = std::sqrt(area_factor * target.width * target.height);
  return {target.cx, target.cy, side, side};
}

/// Bilinear resampling of `r` to out_w x out_h pixels. Coordinates outside
/// the image are clamped to the border (replication padding).
inline Image sample_patch(const Image& img, const Region& r, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw Error(ErrorKind::EmptyRegion, "output size must be positive");
  if (!(r.width > 0.0) || !(r.height > 0.0) || std::lround(r.width * r.height) == 0)
    throw Error(ErrorKind::EmptyRegion, "region area rounds to zero");
  if (img.empty()) throw Error(ErrorKind::EmptyRegion, "source image is empty");

  Image out(out_w, out_h, img.channels);
  const double sx = r.width / out_w;
  const double sy = r.height / out_h;
  const double x0 = r.cx - 0.5 * r.width;
  const double y0 = r.cy - 0.5 * r.height;
  const double max_x = img.width - 1;
  const double max_y = img.height - 1;

  std::vector<int> xl(out_w), xh(out_w);
  std::vector<double> xf(out_w);
  for (int u = 0; u < out_w; ++u) {
    const double x = std::clamp(x0 + (u + 0.5) * sx, 0.0, max_x);
    xl[u] = static_cast<int>(std::floor(x));
    xh[u] = std::min(xl[u] + 1, img.width - 1);
    xf[u] = x - xl[u];
  }
  for (int v = 0; v < out_h; ++v) {
    const double y = std::clamp(y0 + (v + 0.5) * sy, 0.0, max_y);
    const int yl = static_cast<int>(std::floor(y));
    const int yh = std::min(yl + 1, img.height - 1);
    const double yf = y - yl;
    for (int u = 0; u < out_w; ++u) {
      for (int c = 0; c < img.channels; ++c) {
        const double top = img.at(xl[u], yl, c) * (1.0 - xf[u]) + img.at(xh[u], yl, c) * xf[u];
        const double bot = img.at(xl[u], yh, c) * (1.0 - xf[u]) + img.at(xh[u], yh, c) * xf[u];
        const double val = top * (1.0 - yf) + bot * yf;
        out.at(u, v, c) = static_cast<std::uint8_t>(std::clamp(std::lround(val), 0L, 255L));
      }
    }
  }
  return out;
}

/// Gradient-orientation histograms per cell.
///
/// Unsigned orientation in [0, pi) is split into `orientation_bins` bins whose
/// centers sit at k*pi/B, so a purely horizontal gradient lands in bin 0. Each
/// pixel votes its gradient magnitude into the two nearest bins of its own
/// cell. Each cell is then normalized against the four 2x2-cell blocks that
/// contain it (clamped at the grid border): L2 normalize, clip at 0.2,
/// renormalize, and average the four results. Values land in [0, 1].
template <typename T = double>
MultiChannel<RealGrid<T>> extract_hog(const Image& patch, const FeatureConfig& cfg) {
  cfg.validate();
  const int cell = cfg.cell_size;
  if (patch.empty() || patch.width % cell != 0 || patch.height % cell != 0)
    throw Error(ErrorKind::DimNotDivisible, "patch " + std::to_string(patch.width) + "x" +
                                                std::to_string(patch.height) + " not divisible by cell size " +
                                                std::to_string(cell));
  const int W = patch.width, H = patch.height;
  const int rows = H / cell, cols = W / cell;
  const int bins = cfg.orientation_bins;

  std::vector<double> lum(static_cast<std::size_t>(W) * H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) lum[static_cast<std::size_t>(y) * W + x] = patch.luminance(x, y);
  auto L = [&](int x, int y) {
    x = std::clamp(x, 0, W - 1);
    y = std::clamp(y, 0, H - 1);
    return lum[static_cast<std::size_t>(y) * W + x];
  };

  // hist[(r * cols + c) * bins + b]
  std::vector<double> hist(static_cast<std::size_t>(rows) * cols * bins, 0.0);
  const double bin_width = std::numbers::pi / bins;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double gx = L(x + 1, y) - L(x - 1, y);
      const double gy = L(x, y + 1) - L(x, y - 1);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += std::numbers::pi;
      if (theta >= std::numbers::pi) theta -= std::numbers::pi;
      const double pos = theta / bin_width;
      const double fl = std::floor(pos);
      const double frac = pos - fl;
      const int lo = static_cast<int>(fl) % bins;
      const int hi = (lo + 1) % bins;
      double* h = &hist[(static_cast<std::size_t>(y / cell) * cols + x / cell) * bins];
      h[lo] += mag * (1.0 - frac);
      h[hi] += mag * frac;
    }
  }

  std::vector<double> energy(static_cast<std::size_t>(rows) * cols, 0.0);
  for (std::size_t i = 0; i < energy.size(); ++i)
    for (int b = 0; b < bins; ++b) energy[i] += hist[i * bins + b] * hist[i * bins + b];

  constexpr double eps = 1e-6;
  constexpr double clip = 0.2;
  MultiChannel<RealGrid<T>> out(static_cast<std::size_t>(cfg.channels()), rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::vector<double> acc(bins, 0.0);
      for (int si : {-1, 1}) {
        for (int sj : {-1, 1}) {
          const std::array<int, 4> block = {
              r * cols + c,
              std::clamp(r + si, 0, rows - 1) * cols + c,
              r * cols + std::clamp(c + sj, 0, cols - 1),
              std::clamp(r + si, 0, rows - 1) * cols + std::clamp(c + sj, 0, cols - 1),
          };
          double e = eps;
          for (int idx : block) e += energy[idx];
          const double inv = 1.0 / std::sqrt(e);
          double clipped_energy = eps;
          for (int idx : block)
            for (int b = 0; b < bins; ++b) {
              const double v = std::min(hist[static_cast<std::size_t>(idx) * bins + b] * inv, clip);
              clipped_energy += v * v;
            }
          const double inv2 = 1.0 / std::sqrt(clipped_energy);
          const double* h = &hist[static_cast<std::size_t>(block[0]) * bins];
          for (int b = 0; b < bins; ++b) acc[b] += std::min(h[b] * inv, clip) * inv2;
        }
      }
      for (int b = 0; b < bins; ++b) out[b](r, c) = static_cast<T>(0.25 * acc[b]);
    }
  }

  if (cfg.include_gray) {
    auto& gray = out[bins];
    const double norm = 1.0 / (255.0 * cell * cell);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        double s = 0.0;
        for (int y = r * cell; y < (r + 1) * cell; ++y)
          for (int x = c * cell; x < (c + 1) * cell; ++x) s += lum[static_cast<std::size_t>(y) * W + x];
        gray(r, c) = static_cast<T>(s * norm - 0.5);
      }
  }
  return out;
}

/// Separable Hann window, 0.25 (1 - cos(2 pi i/(M-1))) (1 - cos(2 pi j/(N-1))).
/// A length-1 axis contributes a factor of 1.
template <typename T = double>
RealGrid<T> hann_window(std::size_t rows, std::size_t cols) {
  auto axis = [](std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n > 1)
      for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1)));
    return w;
  };
  const auto wr = axis(rows);
  const auto wc = axis(cols);
  RealGrid<T> out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = static_cast<T>(wr[i] * wc[j]);
  return out;
}

template <typename T>
MultiChannel<RealGrid<T>> cosine_window(MultiChannel<RealGrid<T>> f) {
  if (f.empty()) return f;
  const auto w = hann_window<T>(f.rows(), f.cols());
  for (auto& g : f)
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= w[i];
  return f;
}

/// Full sampling pipeline: resample `region` to a square `patch_size` patch,
/// compute HOG (+ gray) and apply the configured window.
template <typename T = double>
MultiChannel<RealGrid<T>> extract_features(const Image& img, const Region& region, int patch_size,
                                           const FeatureConfig& cfg) {
  auto feats = extract_hog<T>(sample_patch(img, region, patch_size, patch_size), cfg);
  if (cfg.window == WindowKind::Cosine) feats = cosine_window(std::move(feats));
  return feats;
}

}  // namespace strcf
