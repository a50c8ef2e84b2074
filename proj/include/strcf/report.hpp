#pragma once

// JSON / CSV result files.
//
// Per-sequence JSON:
//   { "kind": "sequence", "sequence": name, "mode": "strcf"|"interp",
//     "config": { key: value-string, ... },
//     "summary": { "mean_op", "auc", "success_curve": [{threshold, value}...],
//                  "fps", "tracked_frames", "step_seconds" },
//     "records": [ { "frame", "predicted": [x,y,w,h], "truth": [x,y,w,h], "iou" } ] }
// Boxes are written 1-indexed (OTB convention); "iou" is null for frames with
// invalid ground truth. Timing fields are null when timing is suppressed.
//
// Dataset JSON: { "kind": "dataset", "sequences": [names], "summary": {...} }
//
// Success-curve CSV: header "threshold,success", then 21 lines, 6 decimals.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "strcf/config.hpp"
#include "strcf/eval.hpp"

namespace strcf {

using json = nlohmann::ordered_json;

inline json box_json(const Box& b) { return json::array({b.x + 1.0, b.y + 1.0, b.w, b.h}); }

inline json summary_json(const EvalSummary& s, bool with_timing) {
  json curve = json::array();
  for (std::size_t k = 0; k < kCurvePoints; ++k)
    curve.push_back({{"threshold", curve_threshold(k)}, {"value", s.success_curve[k]}});
  json out = {{"mean_op", s.mean_op_at_half}, {"auc", s.auc}, {"success_curve", curve}};
  out["tracked_frames"] = s.tracked_frames;
  if (with_timing) {
    out["fps"] = s.fps;
    out["step_seconds"] = s.step_seconds;
  } else {
    out["fps"] = nullptr;
    out["step_seconds"] = nullptr;
  }
  return out;
}

inline EvalSummary summary_from_json(const json& j) {
  EvalSummary s;
  s.mean_op_at_half = j.at("mean_op").get<double>();
  s.auc = j.at("auc").get<double>();
  const auto& curve = j.at("success_curve");
  if (!curve.is_array() || curve.size() != kCurvePoints)
    throw Error(ErrorKind::ParseError, "success_curve must have 21 points");
  for (std::size_t k = 0; k < kCurvePoints; ++k) s.success_curve[k] = curve[k].at("value").get<double>();
  s.tracked_frames = j.at("tracked_frames").get<std::size_t>();
  s.fps = j.at("fps").is_null() ? 0.0 : j.at("fps").get<double>();
  s.step_seconds = j.at("step_seconds").is_null() ? 0.0 : j.at("step_seconds").get<double>();
  return s;
}

inline json sequence_json(const std::string& name, const TrackerConfig& cfg, const OpeResult& result,
                          bool with_timing) {
  json config = json::object();
  std::istringstream lines(dump_config(cfg));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find('=');
    config[line.substr(0, eq)] = line.substr(eq + 1);
  }
  json records = json::array();
  for (const auto& r : result.records) {
    json rec = {{"frame", r.frame}, {"predicted", box_json(r.predicted)}, {"truth", box_json(r.truth)}};
    rec["iou"] = r.iou ? json(*r.iou) : json(nullptr);
    records.push_back(std::move(rec));
  }
  return {{"kind", "sequence"},
          {"sequence", name},
          {"mode", cfg.mode == UpdateMode::TemporalRegularized ? "strcf" : "interp"},
          {"config", config},
          {"summary", summary_json(result.summary, with_timing)},
          {"records", records}};
}

inline std::string success_csv(const EvalSummary& s) {
  std::string out = "threshold,success\n";
  char buf[64];
  for (std::size_t k = 0; k < kCurvePoints; ++k) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", curve_threshold(k), s.success_curve[k]);
    out += buf;
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace strcf
