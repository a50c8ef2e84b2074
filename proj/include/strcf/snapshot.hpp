#pragma once

// Binary tracker snapshot.
//
// Layout (all integers u64 little-endian, all reals IEEE-754 binary64
// little-endian):
//   magic    "STRCF1\0" (7 bytes)
//   version  u64 = 1
//   config   cell_size, orientation_bins, include_gray, window, patch_size (u64)
//            search_area_factor, mu, gamma0, gamma_max, rho (f64)
//            iters (u64), sigma_factor (f64), num_scales (u64)
//            scale_step, scale_lr, penalty_eps, w_min, alpha (f64)
//            mode (u64), interp_rate (f64)
//   geometry cx, cy, base_width, base_height, base_side, scale (f64)
//            frame_index (u64), last_variation (f64)
//   filters  D, M, N (u64), then f_prev and f_cur, channel-major row-major
// Labels and spatial weights are recomputed from the config on load.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "strcf/tracker.hpp"

namespace strcf {

inline constexpr char kSnapshotMagic[7] = {'S', 'T', 'R', 'C', 'F', '1', '\0'};
inline constexpr std::uint64_t kSnapshotVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::vector<char>& bytes() const noexcept { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<char>& bytes) : bytes_(bytes) {}
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void expect(const char* p, std::size_t n) {
    need(n);
    if (std::memcmp(bytes_.data() + pos_, p, n) != 0) throw Error(ErrorKind::Snapshot, "bad magic header");
    pos_ += n;
  }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(ErrorKind::Snapshot, "truncated snapshot");
  }
  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

template <typename T>
std::vector<char> serialize(const TrackerState<T>& s) {
  detail::ByteWriter w;
  w.raw(kSnapshotMagic, sizeof(kSnapshotMagic));
  w.u64(kSnapshotVersion);
  const auto& c = s.config;
  w.u64(static_cast<std::uint64_t>(c.features.cell_size));
  w.u64(static_cast<std::uint64_t>(c.features.orientation_bins));
  w.u64(c.features.include_gray ? 1 : 0);
  w.u64(c.features.window == WindowKind::Cosine ? 0 : 1);
  w.u64(static_cast<std::uint64_t>(c.patch_size));
  w.f64(c.search_area_factor);
  w.f64(c.solver.mu);
  w.f64(c.solver.gamma0);
  w.f64(c.solver.gamma_max);
  w.f64(c.solver.rho);
  w.u64(static_cast<std::uint64_t>(c.solver.iters));
  w.f64(c.label.sigma_factor);
  w.u64(static_cast<std::uint64_t>(c.scale.num_scales));
  w.f64(c.scale.scale_step);
  w.f64(c.scale.scale_lr);
  w.f64(c.scale.penalty_eps);
  w.f64(c.weight.w_min);
  w.f64(c.weight.alpha);
  w.u64(c.mode == UpdateMode::TemporalRegularized ? 0 : 1);
  w.f64(c.interp_rate);

  w.f64(s.cx);
  w.f64(s.cy);
  w.f64(s.base_width);
  w.f64(s.base_height);
  w.f64(s.base_side);
  w.f64(s.scale);
  w.u64(s.frame_index);
  w.f64(s.last_variation);

  const auto& f = s.filter.f_cur;
  w.u64(f.channels());
  w.u64(f.rows());
  w.u64(f.cols());
  for (const auto* m : {&s.filter.f_prev, &s.filter.f_cur})
    for (const auto& g : *m)
      for (const auto v : g.values()) w.f64(static_cast<double>(v));
  return w.bytes();
}

template <typename T = double>
TrackerState<T> deserialize(const std::vector<char>& bytes) {
  detail::ByteReader r(bytes);
  r.expect(kSnapshotMagic, sizeof(kSnapshotMagic));
  if (r.u64() != kSnapshotVersion) throw Error(ErrorKind::Snapshot, "unsupported snapshot version");
  TrackerState<T> s;
  auto& c = s.config;
  c.features.cell_size = static_cast<int>(r.u64());
  c.features.orientation_bins = static_cast<int>(r.u64());
  c.features.include_gray = r.u64() != 0;
  c.features.window = r.u64() == 0 ? WindowKind::Cosine : WindowKind::None;
  c.patch_size = static_cast<int>(r.u64());
  c.search_area_factor = r.f64();
  c.solver.mu = r.f64();
  c.solver.gamma0 = r.f64();
  c.solver.gamma_max = r.f64();
  c.solver.rho = r.f64();
  c.solver.iters = static_cast<int>(r.u64());
  c.label.sigma_factor = r.f64();
  c.scale.num_scales = static_cast<int>(r.u64());
  c.scale.scale_step = r.f64();
  c.scale.scale_lr = r.f64();
  c.scale.penalty_eps = r.f64();
  c.weight.w_min = r.f64();
  c.weight.alpha = r.f64();
  c.mode = r.u64() == 0 ? UpdateMode::TemporalRegularized : UpdateMode::LinearInterpolation;
  c.interp_rate = r.f64();
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Snapshot, e.what());
  }

  s.cx = r.f64();
  s.cy = r.f64();
  s.base_width = r.f64();
  s.base_height = r.f64();
  s.base_side = r.f64();
  s.scale = r.f64();
  s.frame_index = r.u64();
  s.last_variation = r.f64();

  const std::size_t D = r.u64(), M = r.u64(), N = r.u64();
  if (D == 0 || M != c.grid_size() || N != c.grid_size())
    throw Error(ErrorKind::Snapshot, "filter dimensions do not match the config");
  for (auto* m : {&s.filter.f_prev, &s.filter.f_cur}) {
    *m = MultiChannel<RealGrid<T>>(D, M, N);
    for (auto& g : *m)
      for (auto& v : g.values()) v = static_cast<T>(r.f64());
  }
  if (!r.done()) throw Error(ErrorKind::Snapshot, "trailing bytes in snapshot");
  detail::refresh_derived(s);
  return s;
}

template <typename T>
void save_snapshot(const std::filesystem::path& path, const TrackerState<T>& s) {
  const auto bytes = serialize(s);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

template <typename T = double>
TrackerState<T> load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize<T>(bytes);
}

}  // namespace strcf
