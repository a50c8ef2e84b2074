#pragma once

// One-pass evaluation over OTB-layout sequences.

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "strcf/image_io.hpp"
#include "strcf/tracker.hpp"

namespace strcf {

/// Axis-aligned box, 0-indexed: covers [x, x + w) x [y, y + h) where pixel
/// i spans [i, i + 1).
struct Box {
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;

  bool valid() const noexcept {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0.0 && h > 0.0;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

inline Region to_region(const Box& b) { return {b.x + 0.5 * b.w - 0.5, b.y + 0.5 * b.h - 0.5, b.w, b.h}; }
inline Box to_box(const Region& r) { return {r.cx - 0.5 * r.width + 0.5, r.cy - 0.5 * r.height + 0.5, r.width, r.height}; }

inline double iou(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid()) throw Error(ErrorKind::DegenerateBox, "boxes must have positive finite size");
  const double iw = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = iw * ih;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

struct Sequence {
  std::string name;
  std::vector<std::filesystem::path> frame_paths;
  /// 0-indexed; invalid boxes (non-positive or NaN) are kept and skipped by metrics.
  std::vector<Box> ground_truth;

  std::size_t size() const noexcept { return frame_paths.size(); }
};

inline constexpr std::string_view kGroundTruthFile = "groundtruth_rect.txt";

namespace detail {

inline bool is_frame_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

inline std::optional<double> parse_number(std::string_view tok) {
  std::string lower(tok);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses OTB ground truth: four numbers per line separated by commas, tabs
/// or spaces, 1-indexed. Blank lines are ignored.
inline std::vector<Box> parse_ground_truth(std::istream& in) {
  std::vector<Box> boxes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string_view> tokens;
    std::string_view rest(line);
    while (!rest.empty()) {
      const auto start = rest.find_first_not_of(", \t");
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const auto stop = rest.find_first_of(", \t");
      tokens.push_back(rest.substr(0, stop));
      rest.remove_prefix(stop == std::string_view::npos ? rest.size() : stop);
    }
    if (tokens.empty()) continue;
    if (tokens.size() != 4) throw ParseError(line_no, "expected 4 values, got " + std::to_string(tokens.size()));
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
      const auto n = detail::parse_number(tokens[i]);
      if (!n) throw ParseError(line_no, "not a number: '" + std::string(tokens[i]) + "'");
      v[i] = *n;
    }
    boxes.push_back({v[0] - 1.0, v[1] - 1.0, v[2], v[3]});
  }
  return boxes;
}

inline Sequence load_sequence(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  Sequence seq;
  seq.name = fs::absolute(dir).lexically_normal().filename().string();
  if (seq.name.empty()) seq.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();

  const fs::path gt_path = dir / kGroundTruthFile;
  if (!fs::is_regular_file(gt_path))
    throw Error(ErrorKind::MissingGroundTruth, "missing " + gt_path.string());
  const fs::path img_dir = dir / "img";
  if (!fs::is_directory(img_dir)) throw Error(ErrorKind::Io, "missing frame directory " + img_dir.string());

  for (const auto& entry : fs::directory_iterator(img_dir))
    if (entry.is_regular_file() && detail::is_frame_file(entry.path())) seq.frame_paths.push_back(entry.path());
  std::sort(seq.frame_paths.begin(), seq.frame_paths.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  std::ifstream in(gt_path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + gt_path.string());
  seq.ground_truth = parse_ground_truth(in);
  if (seq.ground_truth.size() != seq.frame_paths.size())
    throw Error(ErrorKind::FrameCountMismatch, std::to_string(seq.frame_paths.size()) + " frames but " +
                                                   std::to_string(seq.ground_truth.size()) + " ground-truth boxes");
  if (seq.frame_paths.empty()) throw Error(ErrorKind::EmptyInput, "sequence has no frames");
  return seq;
}

struct EvalRecord {
  std::size_t frame = 0;  // 1-based
  Box predicted;
  Box truth;
  std::optional<double> iou;  // empty when the ground truth is invalid
};

inline constexpr std::size_t kCurvePoints = 21;

/// threshold k / 20 for k = 0..20.
inline constexpr double curve_threshold(std::size_t k) { return static_cast<double>(k) / 20.0; }

struct EvalSummary {
  double mean_op_at_half = 0.0;
  std::array<double, kCurvePoints> success_curve{};
  double auc = 0.0;
  double fps = 0.0;
  std::size_t tracked_frames = 0;  // step calls
  double step_seconds = 0.0;
};

/// OP and success curve over the valid frames, with strict IoU > threshold.
inline EvalSummary summarize(const std::vector<EvalRecord>& records, std::size_t tracked_frames = 0,
                             double step_seconds = 0.0) {
  std::vector<double> ious;
  for (const auto& r : records)
    if (r.iou) ious.push_back(*r.iou);
  if (ious.empty()) throw Error(ErrorKind::EmptyInput, "no frames with valid ground truth");
  EvalSummary s;
  for (std::size_t k = 0; k < kCurvePoints; ++k) {
    const double th = curve_threshold(k);
    const auto hits = std::count_if(ious.begin(), ious.end(), [th](double v) { return v > th; });
    s.success_curve[k] = static_cast<double>(hits) / static_cast<double>(ious.size());
  }
  s.mean_op_at_half = s.success_curve[10];
  double total = 0.0;
  for (double v : s.success_curve) total += v;
  s.auc = total / static_cast<double>(kCurvePoints);
  s.tracked_frames = tracked_frames;
  s.step_seconds = step_seconds;
  s.fps = step_seconds > 0.0 ? static_cast<double>(tracked_frames) / step_seconds : 0.0;
  return s;
}

struct OpeResult {
  std::vector<EvalRecord> records;
  EvalSummary summary;
  std::vector<double> variations;  // last_variation after every frame
};

/// Per-frame callback, e.g. for overlays: (frame index 0-based, image, predicted).
using FrameObserver = std::function<void(std::size_t, const Image&, const Box&)>;

/// Initializes on frame 1 with its ground truth, then steps through every
/// remaining frame without resets.
template <typename T = double>
OpeResult run_ope(const Sequence& seq, const TrackerConfig& cfg, const FrameObserver& observer = {},
                  TrackerState<T>* final_state = nullptr) {
  if (seq.frame_paths.empty()) throw Error(ErrorKind::EmptyInput, "sequence has no frames");
  if (!seq.ground_truth.front().valid())
    throw Error(ErrorKind::DegenerateBox, "first-frame ground truth is invalid");

  OpeResult out;
  auto record = [&](std::size_t i, const Box& pred) {
    EvalRecord r{i + 1, pred, seq.ground_truth[i], std::nullopt};
    if (r.truth.valid() && pred.valid()) r.iou = iou(pred, r.truth);
    else if (r.truth.valid()) r.iou = 0.0;
    out.records.push_back(r);
  };

  Image first = load_image(seq.frame_paths.front());
  auto state = init<T>(first, to_region(seq.ground_truth.front()), cfg);
  const Box first_box = to_box(state.target());
  record(0, first_box);
  out.variations.push_back(state.last_variation);
  if (observer) observer(0, first, first_box);

  double seconds = 0.0;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const Image img = load_image(seq.frame_paths[i]);
    const auto t0 = std::chrono::steady_clock::now();
    const Region pred = step(state, img, cfg.mode);
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const Box box = to_box(pred);
    record(i, box);
    out.variations.push_back(state.last_variation);
    if (observer) observer(i, img, box);
  }
  out.summary = summarize(out.records, seq.size() - 1, seconds);
  if (final_state) *final_state = std::move(state);
  return out;
}

namespace detail {

/// Order-independent mean: sums the sorted values.
inline double sorted_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/// Unweighted per-sequence mean of OP, curve points and AUC; FPS is total
/// frames over total step time.
inline EvalSummary aggregate(const std::vector<EvalSummary>& summaries) {
  if (summaries.empty()) throw Error(ErrorKind::EmptyInput, "nothing to aggregate");
  EvalSummary out;
  auto mean_of = [&](auto field) {
    std::vector<double> v;
    for (const auto& s : summaries) v.push_back(field(s));
    return detail::sorted_mean(std::move(v));
  };
  out.mean_op_at_half = mean_of([](const EvalSummary& s) { return s.mean_op_at_half; });
  out.auc = mean_of([](const EvalSummary& s) { return s.auc; });
  for (std::size_t k = 0; k < kCurvePoints; ++k)
    out.success_curve[k] = mean_of([k](const EvalSummary& s) { return s.success_curve[k]; });
  std::vector<double> secs;
  for (const auto& s : summaries) {
    out.tracked_frames += s.tracked_frames;
    secs.push_back(s.step_seconds);
  }
  std::sort(secs.begin(), secs.end());
  for (double v : secs) out.step_seconds += v;
  out.fps = out.step_seconds > 0.0 ? static_cast<double>(out.tracked_frames) / out.step_seconds : 0.0;
  return out;
}

}  // namespace strcf
