#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "strcf/features.hpp"
#include "strcf/fft.hpp"
#include "strcf/solver.hpp"

namespace strcf {

struct LabelConfig {
  /// Gaussian bandwidth as a fraction of sqrt(target area in cells).
  double sigma_factor = 1.0 / 16.0;
  friend bool operator==(const LabelConfig&, const LabelConfig&) = default;
};

struct ScaleConfig {
  int num_scales = 5;
  double scale_step = 1.01;
  double scale_lr = 0.025;
  double penalty_eps = 0.005;
  friend bool operator==(const ScaleConfig&, const ScaleConfig&) = default;
};

struct WeightConfig {
  double w_min = 0.1;
  double alpha = 3.0;
  friend bool operator==(const WeightConfig&, const WeightConfig&) = default;
};

enum class UpdateMode {
  TemporalRegularized,  // relearn against the previous filter with weight mu
  LinearInterpolation,  // learn with mu = 0, then blend into the model
};

struct TrackerConfig {
  FeatureConfig features;
  AdmmParams solver;
  LabelConfig label;
  ScaleConfig scale;
  WeightConfig weight;
  /// Side of the square patch the search region is resampled to.
  int patch_size = 200;
  /// Search-region side is sqrt(search_area_factor * W * H).
  double search_area_factor = 5.0;
  UpdateMode mode = UpdateMode::TemporalRegularized;
  /// Learning rate for UpdateMode::LinearInterpolation.
  double interp_rate = 0.025;

  void validate() const {
    features.validate();
    solver.validate();
    if (!(label.sigma_factor > 0.0)) throw Error(ErrorKind::Config, "sigma_factor must be > 0");
    if (scale.num_scales < 1 || scale.num_scales % 2 == 0)
      throw Error(ErrorKind::Config, "num_scales must be a positive odd count");
    if (!(scale.scale_step > 1.0)) throw Error(ErrorKind::Config, "scale_step must be > 1");
    if (!(scale.scale_lr >= 0.0 && scale.scale_lr <= 1.0))
      throw Error(ErrorKind::Config, "scale_lr must lie in [0, 1]");
    if (!(scale.penalty_eps >= 0.0)) throw Error(ErrorKind::Config, "penalty_eps must be >= 0");
    if (!(weight.w_min >= 0.0) || !(weight.alpha >= 0.0))
      throw Error(ErrorKind::Config, "spatial weight constants must be >= 0");
    if (patch_size < features.cell_size || patch_size % features.cell_size != 0)
      throw Error(ErrorKind::Config, "patch_size must be a positive multiple of cell_size");
    if (!(search_area_factor > 0.0)) throw Error(ErrorKind::Config, "search_area_factor must be > 0");
    if (!(interp_rate >= 0.0 && interp_rate <= 1.0))
      throw Error(ErrorKind::Config, "interp_rate must lie in [0, 1]");
  }

  std::size_t grid_size() const noexcept { return static_cast<std::size_t>(patch_size / features.cell_size); }

  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

/// Gaussian peaked at index (0, 0) with circular distances, so a zero
/// displacement maps to the label peak.
template <typename T = double>
RealGrid<T> gaussian_label(std::size_t rows, std::size_t cols, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::Config, "label sigma must be > 0");
  RealGrid<T> y(rows, cols);
  const double denom = 2.0 * sigma * sigma;
  for (std::size_t i = 0; i < rows; ++i) {
    const double di = static_cast<double>(std::min(i, rows - i));
    for (std::size_t j = 0; j < cols; ++j) {
      const double dj = static_cast<double>(std::min(j, cols - j));
      y(i, j) = static_cast<T>(std::exp(-(di * di + dj * dj) / denom));
    }
  }
  return y;
}

/// Quadratic bowl w_min + alpha ((di / (m/2))^2 + (dj / (n/2))^2) around the
/// geometric grid center ((rows-1)/2, (cols-1)/2); m x n is the target extent
/// in cells.
template <typename T = double>
SpatialWeight<T> build_spatial_weight(std::size_t rows, std::size_t cols, double target_rows, double target_cols,
                                      double w_min, double alpha) {
  if (!(target_rows > 0.0) || !(target_cols > 0.0))
    throw Error(ErrorKind::Config, "target extent in cells must be positive");
  if (target_rows > static_cast<double>(rows) || target_cols > static_cast<double>(cols))
    throw Error(ErrorKind::DimMismatch, "target extent exceeds the feature grid");
  RealGrid<T> w(rows, cols);
  const double ci = 0.5 * static_cast<double>(rows - 1);
  const double cj = 0.5 * static_cast<double>(cols - 1);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double a = (static_cast<double>(i) - ci) / (0.5 * target_rows);
      const double b = (static_cast<double>(j) - cj) / (0.5 * target_cols);
      w(i, j) = static_cast<T>(w_min + alpha * (a * a + b * b));
    }
  return SpatialWeight<T>(std::move(w));
}

template <typename T = double>
struct TrackerState {
  TrackerConfig config;
  double cx = 0.0, cy = 0.0;
  /// Target size on the first frame; the current size is base * scale.
  double base_width = 0.0, base_height = 0.0;
  /// Search-region side on the first frame.
  double base_side = 0.0;
  double scale = 1.0;
  FilterState<T> filter;
  SpatialWeight<T> spatial_weight;
  RealGrid<T> label;
  std::size_t frame_index = 0;
  /// ||f_t - f_{t-1}||^2 / (||f_t||^2 + ||f_{t-1}||^2) of the latest update.
  double last_variation = 0.0;
  LearnDiagnostics last_diagnostics;

  double target_width() const noexcept { return base_width * scale; }
  double target_height() const noexcept { return base_height * scale; }
  Region target() const noexcept { return {cx, cy, target_width(), target_height()}; }
  Region search() const noexcept { return {cx, cy, base_side * scale, base_side * scale}; }
  /// Image pixels per feature cell at the current scale.
  double cell_pixels() const noexcept {
    return config.features.cell_size * base_side * scale / static_cast<double>(config.patch_size);
  }
};

struct Detection {
  double dx = 0.0;  // columns, feature cells at the detected scale
  double dy = 0.0;  // rows
  int best_scale_index = 0;
  double scale_factor = 1.0;
  double response_peak = 0.0;
};

/// Response peaks below this are low-confidence (labels peak at 1).
inline constexpr double kLowConfidencePeak = 0.1;

namespace detail {

inline std::size_t wrap_index(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

/// Least-squares quadratic over the 3x3 neighborhood (circular indexing);
/// returns the stationary point offset, each component clamped to [-0.5, 0.5].
template <typename T>
std::pair<double, double> subcell_offset(const RealGrid<T>& r, std::size_t pi, std::size_t pj) {
  double S = 0, Sa = 0, Sb = 0, Saa = 0, Sbb = 0, Sab = 0;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      const double v = r(wrap_index(static_cast<long>(pi) + a, r.rows()), wrap_index(static_cast<long>(pj) + b, r.cols()));
      S += v;
      Sa += a * v;
      Sb += b * v;
      Saa += a * a * v;
      Sbb += b * b * v;
      Sab += a * b * v;
    }
  const double c1 = Sa / 6.0, c2 = Sb / 6.0, c5 = Sab / 4.0;
  const double u = 0.5 * (Saa + Sbb - 4.0 / 3.0 * S);
  const double v = 0.5 * (Saa - Sbb);
  const double c3 = 0.5 * (u + v), c4 = 0.5 * (u - v);
  double da = 0.0, db = 0.0;
  const double det = 4.0 * c3 * c4 - c5 * c5;
  if (det > 0.0 && c3 < 0.0) {
    da = (-2.0 * c4 * c1 + c5 * c2) / det;
    db = (-2.0 * c3 * c2 + c5 * c1) / det;
  } else {
    if (c3 < 0.0) da = -c1 / (2.0 * c3);
    if (c4 < 0.0) db = -c2 / (2.0 * c4);
  }
  return {std::clamp(da, -0.5, 0.5), std::clamp(db, -0.5, 0.5)};
}

template <typename T>
void refresh_derived(TrackerState<T>& s) {
  const auto& cfg = s.config;
  const std::size_t n = cfg.grid_size();
  const double cells_per_pixel = static_cast<double>(cfg.patch_size) / (s.base_side * cfg.features.cell_size);
  const double m_rows = std::min(s.base_height * cells_per_pixel, static_cast<double>(n));
  const double m_cols = std::min(s.base_width * cells_per_pixel, static_cast<double>(n));
  s.label = gaussian_label<T>(n, n, cfg.label.sigma_factor * std::sqrt(m_rows * m_cols));
  s.spatial_weight = build_spatial_weight<T>(n, n, m_rows, m_cols, cfg.weight.w_min, cfg.weight.alpha);
}

template <typename T>
double temporal_variation(const MultiChannel<RealGrid<T>>& cur, const MultiChannel<RealGrid<T>>& prev) {
  const double z = squared_norm(cur) + squared_norm(prev);
  return z > 0.0 ? squared_distance(cur, prev) / z : 0.0;
}

/// Relearns at the state's current geometry and rolls the filter history.
template <typename T>
void relearn(TrackerState<T>& s, const Image& img, UpdateMode mode) {
  const auto& cfg = s.config;
  const auto x = extract_features<T>(img, s.search(), cfg.patch_size, cfg.features);
  const auto previous = s.filter.f_cur;
  if (mode == UpdateMode::TemporalRegularized) {
    auto res = learn(x, s.label, s.spatial_weight, previous, cfg.solver);
    s.filter.f_cur = std::move(res.f);
    s.last_diagnostics = std::move(res.diagnostics);
  } else {
    AdmmParams p = cfg.solver;
    p.mu = 0.0;
    auto res = learn(x, s.label, s.spatial_weight, previous, p);
    s.filter.f_cur = linear_interp_update(previous, res.f, cfg.interp_rate);
    s.last_diagnostics = std::move(res.diagnostics);
  }
  s.filter.f_prev = previous;
  s.last_variation = temporal_variation(s.filter.f_cur, s.filter.f_prev);
  ++s.frame_index;
}

}  // namespace detail

/// First frame: build geometry, labels and weights, and learn the initial
/// filter with the temporal term disabled (there is no previous filter).
template <typename T = double>
TrackerState<T> init(const Image& img, const Region& target, const TrackerConfig& cfg = {}) {
  cfg.validate();
  if (!(target.width > 0.0) || !(target.height > 0.0) || std::lround(target.width * target.height) <= 1)
    throw Error(ErrorKind::EmptyRegion, "target must cover more than one pixel");
  if (img.empty()) throw Error(ErrorKind::EmptyRegion, "image is empty");

  TrackerState<T> s;
  s.config = cfg;
  s.cx = target.cx;
  s.cy = target.cy;
  s.base_width = target.width;
  s.base_height = target.height;
  s.base_side = search_region(target, cfg.search_area_factor).width;
  s.scale = 1.0;
  detail::refresh_derived(s);

  const auto x = extract_features<T>(img, s.search(), cfg.patch_size, cfg.features);
  auto zero = zeros_like(x);
  AdmmParams p = cfg.solver;
  p.mu = 0.0;
  auto res = learn(x, s.label, s.spatial_weight, zero, p);
  s.filter.f_prev = std::move(zero);
  s.filter.f_cur = std::move(res.f);
  s.last_diagnostics = std::move(res.diagnostics);
  s.last_variation = 0.0;
  s.frame_index = 1;
  return s;
}

/// Evaluates the current filter over the scale pyramid around the current
/// position and returns the best displacement (sub-cell refined).
template <typename T>
Detection detect(const TrackerState<T>& s, const Image& img) {
  if (s.frame_index == 0) throw Error(ErrorKind::Config, "tracker not initialized");
  const auto& cfg = s.config;
  const int S = cfg.scale.num_scales;
  const int mid = S / 2;
  const auto fhat = dft2(s.filter.f_cur);

  Detection best;
  best.response_peak = -std::numeric_limits<double>::infinity();
  std::optional<RealGrid<T>> best_response;
  std::size_t bi = 0, bj = 0;
  for (int k = 0; k < S; ++k) {
    const double factor = std::pow(cfg.scale.scale_step, k - mid);
    const double side = s.base_side * s.scale * factor;
    const auto z = extract_features<T>(img, {s.cx, s.cy, side, side}, cfg.patch_size, cfg.features);
    auto response = idft2(correlate_spectrum(dft2(z), fhat));
    const double penalty = 1.0 - cfg.scale.penalty_eps * std::abs(k - mid);
    for (auto& v : response.values()) v = static_cast<T>(v * penalty);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < response.size(); ++i)
      if (response[i] > response[arg]) arg = i;
    const double peak = response[arg];
    if (peak > best.response_peak) {
      best.response_peak = peak;
      best.best_scale_index = k;
      best.scale_factor = factor;
      bi = arg / response.cols();
      bj = arg % response.cols();
      best_response = std::move(response);
    }
  }

  const auto& r = *best_response;
  const auto [oi, oj] = detail::subcell_offset(r, bi, bj);
  auto wrapped = [](std::size_t i, std::size_t n) {
    return i > n / 2 ? static_cast<double>(i) - static_cast<double>(n) : static_cast<double>(i);
  };
  const double half_rows = 0.5 * static_cast<double>(r.rows());
  const double half_cols = 0.5 * static_cast<double>(r.cols());
  best.dy = std::clamp(wrapped(bi, r.rows()) + oi, -half_rows, half_rows);
  best.dx = std::clamp(wrapped(bj, r.cols()) + oj, -half_cols, half_cols);
  return best;
}

/// One tracking step: detect, move, rescale, relearn. Returns the new box.
template <typename T>
Region step(TrackerState<T>& s, const Image& img, UpdateMode mode) {
  const Detection det = detect(s, img);
  const double cell_px = s.cell_pixels() * det.scale_factor;
  s.cx += det.dx * cell_px;
  s.cy += det.dy * cell_px;
  s.scale *= 1.0 + s.config.scale.scale_lr * (det.scale_factor - 1.0);
  detail::relearn(s, img, mode);
  return s.target();
}

template <typename T>
Region step(TrackerState<T>& s, const Image& img) {
  return step(s, img, s.config.mode);
}

/// Test and diagnostics hook: skips detection and places the state on the
/// given box before relearning.
template <typename T>
Region step_at(TrackerState<T>& s, const Image& img, const Region& truth, UpdateMode mode) {
  s.cx = truth.cx;
  s.cy = truth.cy;
  s.scale = std::sqrt((truth.width * truth.height) / (s.base_width * s.base_height));
  detail::relearn(s, img, mode);
  return s.target();
}

}  // namespace strcf
