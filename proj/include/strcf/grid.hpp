#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "strcf/error.hpp"

namespace strcf {

/// Dense row-major 2-D grid. `T` is a real scalar or `std::complex` of one.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0)
      throw Error(ErrorKind::DimMismatch, "grid dimensions must be positive");
  }

  Grid(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0)
      throw Error(ErrorKind::DimMismatch, "grid dimensions must be positive");
    if (data_.size() != rows * cols)
      throw Error(ErrorKind::DimMismatch, "grid data length does not match rows*cols");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  bool same_shape(const Grid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <typename T = double>
using RealGrid = Grid<T>;
template <typename T = double>
using ComplexGrid = Grid<std::complex<T>>;

/// D same-shaped grids, indexed by channel.
template <typename G>
class MultiChannel {
 public:
  using grid_type = G;
  using value_type = typename G::value_type;

  MultiChannel() = default;

  MultiChannel(std::size_t channels, std::size_t rows, std::size_t cols)
      : channels_(channels, G(rows, cols)) {
    if (channels == 0) throw Error(ErrorKind::DimMismatch, "channel count must be positive");
  }

  explicit MultiChannel(std::vector<G> channels) : channels_(std::move(channels)) {
    if (channels_.empty()) throw Error(ErrorKind::DimMismatch, "channel count must be positive");
    for (const auto& c : channels_)
      if (!c.same_shape(channels_.front()))
        throw Error(ErrorKind::DimMismatch, "channels differ in shape");
  }

  std::size_t channels() const noexcept { return channels_.size(); }
  std::size_t rows() const noexcept { return channels_.empty() ? 0 : channels_.front().rows(); }
  std::size_t cols() const noexcept { return channels_.empty() ? 0 : channels_.front().cols(); }
  bool empty() const noexcept { return channels_.empty(); }

  G& operator[](std::size_t d) noexcept { return channels_[d]; }
  const G& operator[](std::size_t d) const noexcept { return channels_[d]; }

  auto begin() noexcept { return channels_.begin(); }
  auto end() noexcept { return channels_.end(); }
  auto begin() const noexcept { return channels_.begin(); }
  auto end() const noexcept { return channels_.end(); }

  template <typename Other>
  bool same_shape(const MultiChannel<Other>& other) const noexcept {
    return channels() == other.channels() && rows() == other.rows() && cols() == other.cols();
  }

  friend bool operator==(const MultiChannel&, const MultiChannel&) = default;

 private:
  std::vector<G> channels_;
};

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::DimMismatch,
                std::string(where) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

template <typename A, typename B>
void require_same_shape(const MultiChannel<A>& a, const MultiChannel<B>& b, const char* where) {
  if (!a.same_shape(b))
    throw Error(ErrorKind::DimMismatch,
                std::string(where) + ": " + std::to_string(a.channels()) + " channels of " +
                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                    std::to_string(b.channels()) + " channels of " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
}

// Small elementwise helpers used by the solver and tracker.

template <typename T>
double squared_norm(const Grid<T>& g) {
  double s = 0.0;
  for (const auto& v : g.values()) s += static_cast<double>(std::norm(v));
  return s;
}

template <typename G>
double squared_norm(const MultiChannel<G>& m) {
  double s = 0.0;
  for (const auto& g : m) s += squared_norm(g);
  return s;
}

template <typename G>
double squared_distance(const MultiChannel<G>& a, const MultiChannel<G>& b) {
  require_same_shape(a, b, "squared_distance");
  double s = 0.0;
  for (std::size_t d = 0; d < a.channels(); ++d)
    for (std::size_t i = 0; i < a[d].size(); ++i)
      s += static_cast<double>(std::norm(a[d][i] - b[d][i]));
  return s;
}

template <typename G>
MultiChannel<G> zeros_like(const MultiChannel<G>& m) {
  return MultiChannel<G>(m.channels(), m.rows(), m.cols());
}

}  // namespace strcf
