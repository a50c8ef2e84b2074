#pragma once

// Single-frame filter learning with spatial and temporal regularization:
//
//   E(f) = 1/2 || correlate(x, f) - y ||^2 + 1/2 sum_d || w . f_d ||^2 + mu/2 || f - f_prev ||^2
//
// minimized by ADMM over the split f = g with scaled multiplier h:
//   f-step: per-frequency D x D system, rank-one plus identity, solved with
//           Sherman-Morrison in O(D)
//   g-step: elementwise, g = gamma (f + h) / (w^2 + gamma)
//   h-step: h += f - g
//   gamma  <- min(gamma_max, rho * gamma)

#include <cmath>
#include <complex>
#include <vector>

#include "strcf/fft.hpp"
#include "strcf/grid.hpp"

namespace strcf {

/// Nonnegative per-location penalty applied identically to every channel.
template <typename T = double>
class SpatialWeight {
 public:
  SpatialWeight() = default;
  explicit SpatialWeight(RealGrid<T> grid) : grid_(std::move(grid)) {
    for (const auto v : grid_.values())
      if (!std::isfinite(static_cast<double>(v)) || v < T(0))
        throw Error(ErrorKind::Config, "spatial weight entries must be finite and nonnegative");
  }

  const RealGrid<T>& grid() const noexcept { return grid_; }
  std::size_t rows() const noexcept { return grid_.rows(); }
  std::size_t cols() const noexcept { return grid_.cols(); }
  T operator[](std::size_t i) const noexcept { return grid_[i]; }

  friend bool operator==(const SpatialWeight&, const SpatialWeight&) = default;

 private:
  RealGrid<T> grid_;
};

struct AdmmParams {
  double mu = 16.0;
  double gamma0 = 10.0;
  double gamma_max = 100.0;
  double rho = 1.2;
  int iters = 2;

  void validate() const {
    if (!(mu >= 0.0)) throw Error(ErrorKind::Config, "mu must be >= 0");
    if (!(gamma0 > 0.0)) throw Error(ErrorKind::Config, "gamma0 must be > 0");
    if (!(gamma_max >= gamma0)) throw Error(ErrorKind::Config, "gamma_max must be >= gamma0");
    if (!(rho >= 1.0)) throw Error(ErrorKind::Config, "rho must be >= 1");
    if (iters < 1) throw Error(ErrorKind::Config, "iters must be >= 1");
  }

  friend bool operator==(const AdmmParams&, const AdmmParams&) = default;
};

/// The filter being learned this frame and the one used on the previous frame.
template <typename T = double>
struct FilterState {
  MultiChannel<RealGrid<T>> f_prev;
  MultiChannel<RealGrid<T>> f_cur;

  friend bool operator==(const FilterState&, const FilterState&) = default;
};

/// Per-call diagnostics, always in double precision.
struct LearnDiagnostics {
  std::vector<double> objective;  // after each iteration
  std::vector<double> gamma;      // stepsize used in each iteration
  double primal_residual = 0.0;   // ||f - g|| after the last iteration
};

template <typename T>
struct LearnResult {
  MultiChannel<RealGrid<T>> f;
  LearnDiagnostics diagnostics;
};

namespace detail {

template <typename T>
void require_weight_shape(const SpatialWeight<T>& w, std::size_t rows, std::size_t cols, const char* where) {
  if (w.rows() != rows || w.cols() != cols)
    throw Error(ErrorKind::DimMismatch, std::string(where) + ": spatial weight shape mismatch");
}

template <typename T>
double objective_parts(const RealGrid<T>& response, const RealGrid<T>& y, const SpatialWeight<T>& w,
                       const MultiChannel<RealGrid<T>>& f, const MultiChannel<RealGrid<T>>& f_prev, double mu) {
  double data = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = static_cast<double>(response[i]) - static_cast<double>(y[i]);
    data += r * r;
  }
  double spatial = 0.0;
  for (const auto& g : f)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = static_cast<double>(w[i]) * static_cast<double>(g[i]);
      spatial += v * v;
    }
  const double temporal = mu == 0.0 ? 0.0 : squared_distance(f, f_prev);
  return 0.5 * data + 0.5 * spatial + 0.5 * mu * temporal;
}

/// f-step core with the g and h spectra pre-combined as diff = ghat - hhat.
template <typename T>
MultiChannel<ComplexGrid<T>> solve_f_pixels(const MultiChannel<ComplexGrid<T>>& xhat, const ComplexGrid<T>& yhat,
                                            const MultiChannel<ComplexGrid<T>>& diff_hat,
                                            const MultiChannel<ComplexGrid<T>>& fprev_hat, double mu, double gamma) {
  const double c = mu + gamma;
  if (c == 0.0) throw Error(ErrorKind::DegenerateRegularization, "mu + gamma must be nonzero");
  const std::size_t D = xhat.channels();
  const std::size_t P = xhat.rows() * xhat.cols();
  MultiChannel<ComplexGrid<T>> out(D, xhat.rows(), xhat.cols());
  std::vector<std::complex<double>> q(D);
  for (std::size_t j = 0; j < P; ++j) {
    const std::complex<double> yc = std::conj(std::complex<double>(yhat[j]));
    double vnorm = 0.0;
    std::complex<double> vhq = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      const std::complex<double> v(xhat[d][j]);
      q[d] = v * yc + gamma * std::complex<double>(diff_hat[d][j]) + mu * std::complex<double>(fprev_hat[d][j]);
      vnorm += std::norm(v);
      vhq += std::conj(v) * q[d];
    }
    const std::complex<double> s = vhq / (c + vnorm);
    for (std::size_t d = 0; d < D; ++d)
      out[d][j] = static_cast<std::complex<T>>((q[d] - std::complex<double>(xhat[d][j]) * s) / c);
  }
  return out;
}

}  // namespace detail

/// E(f) in double precision.
template <typename T>
double objective(const MultiChannel<RealGrid<T>>& x, const RealGrid<T>& y, const SpatialWeight<T>& w,
                 const MultiChannel<RealGrid<T>>& f, const MultiChannel<RealGrid<T>>& f_prev, double mu) {
  require_same_shape(x, f, "objective");
  require_same_shape(f, f_prev, "objective");
  require_same_shape(x[0], y, "objective");
  detail::require_weight_shape(w, x.rows(), x.cols(), "objective");
  return detail::objective_parts(correlate(x, f), y, w, f, f_prev, mu);
}

/// Exact minimizer of the f-subproblem at every frequency j:
///   (v v^H + (mu+gamma) I) fhat_j = v conj(yhat_j) + gamma (ghat_j - hhat_j) + mu fprevhat_j
/// with v the D-vector of sample spectra at j. The conj on yhat follows from the
/// response spectrum being sum_d xhat_d conj(fhat_d); for the usual even labels
/// yhat is real and it has no effect.
template <typename T>
MultiChannel<ComplexGrid<T>> solve_f_subproblem(const MultiChannel<ComplexGrid<T>>& xhat, const ComplexGrid<T>& yhat,
                                                const MultiChannel<ComplexGrid<T>>& ghat,
                                                const MultiChannel<ComplexGrid<T>>& hhat,
                                                const MultiChannel<ComplexGrid<T>>& fprev_hat, double mu,
                                                double gamma) {
  require_same_shape(xhat, ghat, "solve_f_subproblem");
  require_same_shape(xhat, hhat, "solve_f_subproblem");
  require_same_shape(xhat, fprev_hat, "solve_f_subproblem");
  require_same_shape(xhat[0], yhat, "solve_f_subproblem");
  auto diff = ghat;
  for (std::size_t d = 0; d < diff.channels(); ++d)
    for (std::size_t i = 0; i < diff[d].size(); ++i) diff[d][i] -= hhat[d][i];
  return detail::solve_f_pixels(xhat, yhat, diff, fprev_hat, mu, gamma);
}

/// g = gamma (f + h) / (w^2 + gamma), per element and channel.
template <typename T>
MultiChannel<RealGrid<T>> solve_g_subproblem(const SpatialWeight<T>& w, const MultiChannel<RealGrid<T>>& f,
                                             const MultiChannel<RealGrid<T>>& h, double gamma) {
  require_same_shape(f, h, "solve_g_subproblem");
  detail::require_weight_shape(w, f.rows(), f.cols(), "solve_g_subproblem");
  MultiChannel<RealGrid<T>> g(f.channels(), f.rows(), f.cols());
  for (std::size_t d = 0; d < f.channels(); ++d)
    for (std::size_t i = 0; i < f[d].size(); ++i) {
      const double wi = static_cast<double>(w[i]);
      g[d][i] = static_cast<T>(gamma * (static_cast<double>(f[d][i]) + static_cast<double>(h[d][i])) /
                               (wi * wi + gamma));
    }
  return g;
}

template <typename T>
MultiChannel<RealGrid<T>> update_multiplier(MultiChannel<RealGrid<T>> h, const MultiChannel<RealGrid<T>>& f,
                                            const MultiChannel<RealGrid<T>>& g) {
  require_same_shape(h, f, "update_multiplier");
  require_same_shape(h, g, "update_multiplier");
  for (std::size_t d = 0; d < h.channels(); ++d)
    for (std::size_t i = 0; i < h[d].size(); ++i) h[d][i] += f[d][i] - g[d][i];
  return h;
}

inline double update_gamma(double gamma, double rho, double gamma_max) { return std::min(gamma_max, rho * gamma); }

/// Runs `params.iters` ADMM rounds starting from g = f_prev, h = 0, gamma = gamma0.
template <typename T>
LearnResult<T> learn(const MultiChannel<RealGrid<T>>& x, const RealGrid<T>& y, const SpatialWeight<T>& w,
                     const MultiChannel<RealGrid<T>>& f_prev, const AdmmParams& params) {
  params.validate();
  require_same_shape(x, f_prev, "learn");
  require_same_shape(x[0], y, "learn");
  detail::require_weight_shape(w, x.rows(), x.cols(), "learn");

  const auto xhat = dft2(x);
  const auto yhat = dft2(y);
  const auto fprev_hat = dft2(f_prev);

  MultiChannel<RealGrid<T>> g = f_prev;
  MultiChannel<RealGrid<T>> h = zeros_like(f_prev);
  MultiChannel<RealGrid<T>> f;
  double gamma = params.gamma0;

  LearnResult<T> result;
  auto& diag = result.diagnostics;
  diag.objective.reserve(params.iters);
  diag.gamma.reserve(params.iters);

  for (int it = 0; it < params.iters; ++it) {
    auto diff = g;
    for (std::size_t d = 0; d < diff.channels(); ++d)
      for (std::size_t i = 0; i < diff[d].size(); ++i) diff[d][i] -= h[d][i];
    const auto fhat = detail::solve_f_pixels(xhat, yhat, dft2(diff), fprev_hat, params.mu, gamma);
    f = idft2(fhat);
    g = solve_g_subproblem(w, f, h, gamma);
    h = update_multiplier(std::move(h), f, g);

    diag.gamma.push_back(gamma);
    diag.objective.push_back(
        detail::objective_parts(idft2(correlate_spectrum(xhat, fhat)), y, w, f, f_prev, params.mu));
    gamma = update_gamma(gamma, params.rho, params.gamma_max);
  }
  diag.primal_residual = std::sqrt(squared_distance(f, g));
  result.f = std::move(f);
  return result;
}

/// (1 - eta) f_model + eta f_new.
template <typename T>
MultiChannel<RealGrid<T>> linear_interp_update(const MultiChannel<RealGrid<T>>& f_model,
                                               const MultiChannel<RealGrid<T>>& f_new, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorKind::Config, "learning rate must lie in [0, 1]");
  require_same_shape(f_model, f_new, "linear_interp_update");
  auto out = f_model;
  for (std::size_t d = 0; d < out.channels(); ++d)
    for (std::size_t i = 0; i < out[d].size(); ++i)
      out[d][i] = static_cast<T>((1.0 - eta) * static_cast<double>(f_model[d][i]) +
                                 eta * static_cast<double>(f_new[d][i]));
  return out;
}

}  // namespace strcf
