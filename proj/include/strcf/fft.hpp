#pragma once

// 2-D DFT over Grid values, backed by FFTW.
//
// Conventions used everywhere in the library:
//   forward  X[k,l] = sum_{m,n} x[m,n] exp(-2*pi*i*(k*m/M + l*n/N))   (unnormalized)
//   inverse  x[m,n] = 1/(M*N) sum_{k,l} X[k,l] exp(+2*pi*i*(k*m/M + l*n/N))
//   correlate(x, f)[t] = sum_d sum_n x_d[n + t] f_d[n]   (circular indices)
//                      = idft2( sum_d dft2(x_d) * conj(dft2(f_d)) )

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <tuple>

#include "strcf/grid.hpp"

namespace strcf {

namespace detail {

template <typename T>
struct FftwApi;

template <>
struct FftwApi<double> {
  using plan = fftw_plan;
  using complex = fftw_complex;
  static plan make(int rows, int cols, int sign) {
    // Planning never touches these buffers when FFTW_ESTIMATE is used.
    auto* buf = static_cast<complex*>(fftw_malloc(sizeof(complex) * rows * cols));
    plan p = fftw_plan_dft_2d(rows, cols, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    return p;
  }
  static void execute(plan p, std::complex<double>* in, std::complex<double>* out) {
    fftw_execute_dft(p, reinterpret_cast<complex*>(in), reinterpret_cast<complex*>(out));
  }
};

template <>
struct FftwApi<float> {
  using plan = fftwf_plan;
  using complex = fftwf_complex;
  static plan make(int rows, int cols, int sign) {
    auto* buf = static_cast<complex*>(fftwf_malloc(sizeof(complex) * rows * cols));
    plan p = fftwf_plan_dft_2d(rows, cols, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftwf_free(buf);
    return p;
  }
  static void execute(plan p, std::complex<float>* in, std::complex<float>* out) {
    fftwf_execute_dft(p, reinterpret_cast<complex*>(in), reinterpret_cast<complex*>(out));
  }
};

/// Process-wide plan cache. FFTW's planner is not thread-safe, executing a
/// finished plan on new arrays is; plans live until process exit.
template <typename T>
typename FftwApi<T>::plan cached_plan(std::size_t rows, std::size_t cols, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, std::size_t, int>, typename FftwApi<T>::plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(rows, cols, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  auto p = FftwApi<T>::make(static_cast<int>(rows), static_cast<int>(cols), sign);
  plans.emplace(key, p);
  return p;
}

template <typename T>
void transform_in_place(ComplexGrid<T>& g, int sign) {
  auto p = cached_plan<T>(g.rows(), g.cols(), sign);
  FftwApi<T>::execute(p, g.data(), g.data());
}

}  // namespace detail

/// Unnormalized forward transform of a real grid.
template <typename T>
ComplexGrid<T> dft2(const RealGrid<T>& g) {
  ComplexGrid<T> out(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::complex<T>(g[i], T(0));
  detail::transform_in_place(out, FFTW_FORWARD);
  return out;
}

/// Unnormalized forward transform of a complex grid.
template <typename T>
ComplexGrid<T> dft2(const ComplexGrid<T>& g) {
  ComplexGrid<T> out = g;
  detail::transform_in_place(out, FFTW_FORWARD);
  return out;
}

/// Inverse transform with 1/(MN) scaling, no symmetry check.
template <typename T>
ComplexGrid<T> idft2_complex(const ComplexGrid<T>& g) {
  ComplexGrid<T> out = g;
  detail::transform_in_place(out, FFTW_BACKWARD);
  const T scale = T(1) / static_cast<T>(g.size());
  for (auto& v : out.values()) v *= scale;
  return out;
}

/// Relative tolerance on the discarded imaginary part of `idft2`.
template <typename T>
constexpr double symmetry_tolerance() {
  return std::is_same_v<T, float> ? 1e-4 : 1e-8;
}

/// Inverse transform of the spectrum of a real grid. The imaginary residue is
/// discarded after checking it is below tolerance * max |G|.
template <typename T>
RealGrid<T> idft2(const ComplexGrid<T>& g) {
  ComplexGrid<T> full = idft2_complex(g);
  double max_in = 0.0;
  for (const auto& v : g.values()) max_in = std::max(max_in, static_cast<double>(std::abs(v)));
  double max_imag = 0.0;
  for (const auto& v : full.values()) max_imag = std::max(max_imag, std::abs(static_cast<double>(v.imag())));
  if (max_imag > symmetry_tolerance<T>() * max_in)
    throw Error(ErrorKind::SymmetryViolation,
                "imaginary residue " + std::to_string(max_imag) + " exceeds tolerance");
  RealGrid<T> out(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = full[i].real();
  return out;
}

template <typename T>
ComplexGrid<T> hadamard(const ComplexGrid<T>& a, const ComplexGrid<T>& b) {
  require_same_shape(a, b, "hadamard");
  ComplexGrid<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

template <typename T>
MultiChannel<ComplexGrid<T>> dft2(const MultiChannel<RealGrid<T>>& m) {
  std::vector<ComplexGrid<T>> out;
  out.reserve(m.channels());
  for (const auto& g : m) out.push_back(dft2(g));
  return MultiChannel<ComplexGrid<T>>(std::move(out));
}

template <typename T>
MultiChannel<RealGrid<T>> idft2(const MultiChannel<ComplexGrid<T>>& m) {
  std::vector<RealGrid<T>> out;
  out.reserve(m.channels());
  for (const auto& g : m) out.push_back(idft2(g));
  return MultiChannel<RealGrid<T>>(std::move(out));
}

/// Spectrum of the channel-summed response: sum_d xhat_d * conj(fhat_d).
template <typename T>
ComplexGrid<T> correlate_spectrum(const MultiChannel<ComplexGrid<T>>& xhat,
                                  const MultiChannel<ComplexGrid<T>>& fhat) {
  require_same_shape(xhat, fhat, "correlate");
  ComplexGrid<T> acc(xhat.rows(), xhat.cols());
  for (std::size_t d = 0; d < xhat.channels(); ++d)
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += xhat[d][i] * std::conj(fhat[d][i]);
  return acc;
}

/// Channel-summed circular cross-correlation; the peak of the result sits at
/// the displacement of `x` relative to the template `f`.
template <typename T>
RealGrid<T> correlate(const MultiChannel<RealGrid<T>>& x, const MultiChannel<RealGrid<T>>& f) {
  require_same_shape(x, f, "correlate");
  return idft2(correlate_spectrum(dft2(x), dft2(f)));
}

}  // namespace strcf
