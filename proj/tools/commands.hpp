#pragma once

// Command implementations for the `strcf` executable, kept in a header so the
// test suite can drive them in-process.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "strcf/strcf.hpp"

namespace strcf::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kIoError = 2, kConfigError = 3, kInternalError = 4 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::ImageDecode:
    case ErrorKind::MissingGroundTruth:
    case ErrorKind::FrameCountMismatch:
    case ErrorKind::ParseError:
    case ErrorKind::EmptyInput:
    case ErrorKind::EmptyRegion:
    case ErrorKind::DegenerateBox:
    case ErrorKind::Snapshot:
      return kIoError;
    case ErrorKind::Config:
      return kConfigError;
    default:
      return kInternalError;
  }
}

/// STRCF_THREADS caps worker threads; unset or 0 means hardware concurrency.
inline std::size_t thread_budget() {
  std::size_t n = 0;
  if (const char* env = std::getenv("STRCF_THREADS")) n = static_cast<std::size_t>(std::strtoul(env, nullptr, 10));
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Runs fn(i) for i in [0, n) on up to thread_budget() threads. The first
/// exception thrown by any task is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(n, thread_budget());
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

inline void draw_box(Image& img, const Box& b, std::uint8_t r, std::uint8_t g, std::uint8_t bl) {
  auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    if (img.channels == 1) {
      img.at(x, y) = r;
      return;
    }
    img.at(x, y, 0) = r;
    img.at(x, y, 1) = g;
    img.at(x, y, 2) = bl;
  };
  const int x0 = static_cast<int>(std::lround(b.x)), y0 = static_cast<int>(std::lround(b.y));
  const int x1 = static_cast<int>(std::lround(b.x + b.w)) - 1, y1 = static_cast<int>(std::lround(b.y + b.h)) - 1;
  for (int x = x0; x <= x1; ++x) {
    put(x, y0);
    put(x, y1);
  }
  for (int y = y0; y <= y1; ++y) {
    put(x0, y);
    put(x1, y);
  }
}

inline Image to_rgb(const Image& img) {
  if (img.channels == 3) return img;
  Image out(img.width, img.height, 3);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    for (int c = 0; c < 3; ++c) out.data[i * 3 + c] = img.data[i];
  return out;
}

struct TrackOptions {
  std::vector<std::string> sequences;
  std::string config_path;
  std::string out_dir;
  std::string mode;
  bool overlay = false;
  bool timing = true;
  bool snapshot = false;
};

inline TrackerConfig resolve_config(const std::string& path, const std::string& mode) {
  TrackerConfig cfg = path.empty() ? TrackerConfig{} : load_config(path);
  if (!mode.empty()) {
    if (mode == "strcf") cfg.mode = UpdateMode::TemporalRegularized;
    else if (mode == "interp") cfg.mode = UpdateMode::LinearInterpolation;
    else throw Error(ErrorKind::Config, "--mode must be strcf or interp");
  }
  cfg.validate();
  return cfg;
}

inline void cmd_track(const TrackOptions& opt, std::ostream& out) {
  const TrackerConfig cfg = resolve_config(opt.config_path, opt.mode);
  const fs::path out_dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<Sequence> seqs;
  for (const auto& s : opt.sequences) seqs.push_back(load_sequence(s));
  std::vector<std::string> lines(seqs.size());

  parallel_for(seqs.size(), [&](std::size_t i) {
    const auto& seq = seqs[i];
    FrameObserver observer;
    fs::path overlay_dir;
    if (opt.overlay) {
      overlay_dir = out_dir / (seq.name + "_overlay");
      fs::create_directories(overlay_dir);
      observer = [&](std::size_t frame, const Image& img, const Box& pred) {
        Image canvas = to_rgb(img);
        if (seq.ground_truth[frame].valid()) draw_box(canvas, seq.ground_truth[frame], 0, 255, 0);
        draw_box(canvas, pred, 255, 0, 0);
        char name[32];
        std::snprintf(name, sizeof(name), "%04zu.png", frame + 1);
        save_png(overlay_dir / name, canvas);
      };
    }
    TrackerState<double> final_state;
    const OpeResult result = run_ope(seq, cfg, observer, &final_state);
    write_text(out_dir / (seq.name + ".json"), sequence_json(seq.name, cfg, result, opt.timing).dump(2) + "\n");
    write_text(out_dir / (seq.name + "_success.csv"), success_csv(result.summary));
    if (opt.snapshot) save_snapshot(out_dir / (seq.name + ".strcf"), final_state);
    char buf[256];
    if (opt.timing)
      std::snprintf(buf, sizeof(buf), "%s: mean OP %.1f%%  AUC %.1f%%  FPS %.1f", seq.name.c_str(),
                    100.0 * result.summary.mean_op_at_half, 100.0 * result.summary.auc, result.summary.fps);
    else
      std::snprintf(buf, sizeof(buf), "%s: mean OP %.1f%%  AUC %.1f%%", seq.name.c_str(),
                    100.0 * result.summary.mean_op_at_half, 100.0 * result.summary.auc);
    lines[i] = buf;
  });
  for (const auto& l : lines) out << l << '\n';
}

inline constexpr std::string_view kDatasetFile = "dataset.json";

inline void cmd_eval(const std::string& results_dir, const std::string& out_path, std::ostream& out) {
  const fs::path dir(results_dir);
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<std::string> names;
  std::vector<EvalSummary> summaries;
  bool timing = true;
  for (const auto& f : files) {
    const json j = read_json(f);
    if (!j.is_object() || j.value("kind", "") != "sequence") continue;
    names.push_back(j.at("sequence").get<std::string>());
    summaries.push_back(summary_from_json(j.at("summary")));
    timing = timing && !j.at("summary").at("fps").is_null();
  }
  if (summaries.empty()) throw Error(ErrorKind::EmptyInput, "no per-sequence result files in " + dir.string());

  const EvalSummary agg = aggregate(summaries);
  const json doc = {{"kind", "dataset"}, {"sequences", names}, {"summary", summary_json(agg, timing)}};
  const fs::path target = out_path.empty() ? dir / kDatasetFile : fs::path(out_path);
  write_text(target, doc.dump(2) + "\n");
  fs::path csv = target;
  csv.replace_extension(".csv");
  write_text(csv, success_csv(agg));

  char buf[256];
  std::snprintf(buf, sizeof(buf), "sequences: %zu\nmean OP: %.1f%%\nAUC: %.1f%%\n", summaries.size(),
                100.0 * agg.mean_op_at_half, 100.0 * agg.auc);
  out << buf;
  if (timing) {
    std::snprintf(buf, sizeof(buf), "FPS: %.1f\n", agg.fps);
    out << buf;
  }
}

inline void cmd_synth(const std::string& kind, int frames, std::uint64_t seed, const std::string& out_dir) {
  SynthSpec spec;
  spec.kind = parse_synth_kind(kind);
  spec.frames = frames;
  spec.seed = seed;
  write_otb(out_dir, generate_synthetic(spec));
}

inline std::vector<double> parse_mu_list(const std::string& text) {
  std::vector<double> mus;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    tok = detail::trim(tok);
    if (tok.empty()) continue;
    const double v = detail::parse_real("--sweep-mu", tok);
    if (v < 0.0) throw Error(ErrorKind::Config, "--sweep-mu values must be >= 0");
    mus.push_back(v);
  }
  if (mus.empty()) throw Error(ErrorKind::Config, "--sweep-mu needs at least one value");
  return mus;
}

/// Temporal variation per frame with the tracker pinned to the ground truth.
inline std::vector<double> variation_series(const Sequence& seq, const std::vector<Image>& frames,
                                            TrackerConfig cfg, double mu) {
  cfg.solver.mu = mu;
  cfg.mode = UpdateMode::TemporalRegularized;
  auto state = init(frames.front(), to_region(seq.ground_truth.front()), cfg);
  std::vector<double> out{state.last_variation};
  Region last = to_region(seq.ground_truth.front());
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (seq.ground_truth[i].valid()) last = to_region(seq.ground_truth[i]);
    step_at(state, frames[i], last, UpdateMode::TemporalRegularized);
    out.push_back(state.last_variation);
  }
  return out;
}

inline void cmd_diag(const std::string& seq_dir, const std::string& mu_list, const std::string& config_path,
                     const std::string& out_path, std::ostream& out) {
  const TrackerConfig cfg = resolve_config(config_path, "");
  const auto mus = parse_mu_list(mu_list);
  const Sequence seq = load_sequence(seq_dir);
  if (!seq.ground_truth.front().valid()) throw Error(ErrorKind::DegenerateBox, "first-frame ground truth is invalid");
  std::vector<Image> frames;
  for (const auto& p : seq.frame_paths) frames.push_back(load_image(p));

  std::vector<std::vector<double>> series(mus.size());
  parallel_for(mus.size(), [&](std::size_t k) { series[k] = variation_series(seq, frames, cfg, mus[k]); });

  std::string csv = "frame,mu,variation\n";
  char buf[128];
  for (std::size_t k = 0; k < mus.size(); ++k)
    for (std::size_t i = 0; i < series[k].size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%s,%.9e\n", i + 1, detail::format_real(mus[k]).c_str(), series[k][i]);
      csv += buf;
    }
  const fs::path target = out_path.empty() ? fs::path(seq.name + "_variation.csv") : fs::path(out_path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  write_text(target, csv);

  for (std::size_t k = 0; k < mus.size(); ++k) {
    double mean = 0.0;
    for (std::size_t i = 1; i < series[k].size(); ++i) mean += series[k][i];
    mean /= static_cast<double>(std::max<std::size_t>(1, series[k].size() - 1));
    std::snprintf(buf, sizeof(buf), "mu=%s mean variation %.6e\n", detail::format_real(mus[k]).c_str(), mean);
    out << buf;
  }
}

/// Parses argv and dispatches; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Spatial-temporal regularized correlation filter tracker"};
  app.require_subcommand(1);

  TrackOptions track;
  auto* track_cmd = app.add_subcommand("track", "run one-pass evaluation on OTB-layout sequences");
  track_cmd->add_option("--seq", track.sequences, "sequence directory (repeatable)")->required();
  track_cmd->add_option("--config", track.config_path, "key=value config file");
  track_cmd->add_option("--out", track.out_dir, "output directory")->required();
  track_cmd->add_option("--mode", track.mode, "model update: strcf or interp");
  track_cmd->add_flag("--overlay", track.overlay, "write PNG frames with boxes drawn");
  track_cmd->add_flag("--snapshot", track.snapshot, "write the final tracker state");
  bool no_timing = false;
  track_cmd->add_flag("--no-timing", no_timing, "omit wall-clock fields so outputs are byte-reproducible");

  std::string results_dir, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "aggregate per-sequence results");
  eval_cmd->add_option("--results", results_dir, "directory of per-sequence JSON files")->required();
  eval_cmd->add_option("--out", eval_out, "dataset JSON path (default <results>/dataset.json)");

  std::string synth_kind = "translate", synth_out;
  int synth_frames = 50;
  std::uint64_t synth_seed = 1;
  auto* synth_cmd = app.add_subcommand("synth", "render a synthetic OTB-layout sequence");
  synth_cmd->add_option("--kind", synth_kind, "static|translate|scale|occlude");
  synth_cmd->add_option("--frames", synth_frames, "frame count (>= 2)");
  synth_cmd->add_option("--seed", synth_seed, "texture seed");
  synth_cmd->add_option("--out", synth_out, "output sequence directory")->required();

  std::string diag_seq, diag_mu = "1,4,16,64", diag_config, diag_out;
  auto* diag_cmd = app.add_subcommand("diag", "temporal filter variation under a mu sweep");
  diag_cmd->add_option("--seq", diag_seq, "sequence directory")->required();
  diag_cmd->add_option("--sweep-mu", diag_mu, "comma-separated mu values");
  diag_cmd->add_option("--config", diag_config, "key=value config file");
  diag_cmd->add_option("--out", diag_out, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*track_cmd) {
      track.timing = !no_timing;
      cmd_track(track, out);
    } else if (*eval_cmd) {
      cmd_eval(results_dir, eval_out, out);
    } else if (*synth_cmd) {
      cmd_synth(synth_kind, synth_frames, synth_seed, synth_out);
    } else if (*diag_cmd) {
      cmd_diag(diag_seq, diag_mu, diag_config, diag_out, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kInternalError;
  }
  return kOk;
}

}  // namespace strcf::cli
