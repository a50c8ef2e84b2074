#pragma once

// Flat key=value configuration for every tracker tunable. Lines starting
// with '#' and blank lines are ignored; unknown keys are rejected.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "strcf/tracker.hpp"

namespace strcf {

namespace detail {

inline std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline double parse_real(const std::string& key, const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(ErrorKind::Config, key + ": not a real number: '" + s + "'");
  return v;
}

inline int parse_int(const std::string& key, const std::string& s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::Config, key + ": not an integer: '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw Error(ErrorKind::Config, key + ": not a boolean: '" + s + "'");
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct ConfigField {
  std::function<std::string(const TrackerConfig&)> get;
  std::function<void(TrackerConfig&, const std::string&)> set;
};

inline const std::map<std::string, ConfigField>& config_fields() {
  using C = TrackerConfig;
  static const std::map<std::string, ConfigField> fields = {
      {"feature.cell_size",
       {[](const C& c) { return std::to_string(c.features.cell_size); },
        [](C& c, const std::string& v) { c.features.cell_size = parse_int("feature.cell_size", v); }}},
      {"feature.orientation_bins",
       {[](const C& c) { return std::to_string(c.features.orientation_bins); },
        [](C& c, const std::string& v) { c.features.orientation_bins = parse_int("feature.orientation_bins", v); }}},
      {"feature.include_gray",
       {[](const C& c) { return std::string(c.features.include_gray ? "true" : "false"); },
        [](C& c, const std::string& v) { c.features.include_gray = parse_bool("feature.include_gray", v); }}},
      {"feature.window",
       {[](const C& c) { return std::string(c.features.window == WindowKind::Cosine ? "cosine" : "none"); },
        [](C& c, const std::string& v) {
          if (v == "cosine") c.features.window = WindowKind::Cosine;
          else if (v == "none") c.features.window = WindowKind::None;
          else throw Error(ErrorKind::Config, "feature.window: expected cosine|none, got '" + v + "'");
        }}},
      {"feature.patch_size",
       {[](const C& c) { return std::to_string(c.patch_size); },
        [](C& c, const std::string& v) { c.patch_size = parse_int("feature.patch_size", v); }}},
      {"search.area_factor",
       {[](const C& c) { return format_real(c.search_area_factor); },
        [](C& c, const std::string& v) { c.search_area_factor = parse_real("search.area_factor", v); }}},
      {"solver.mu",
       {[](const C& c) { return format_real(c.solver.mu); },
        [](C& c, const std::string& v) { c.solver.mu = parse_real("solver.mu", v); }}},
      {"solver.gamma0",
       {[](const C& c) { return format_real(c.solver.gamma0); },
        [](C& c, const std::string& v) { c.solver.gamma0 = parse_real("solver.gamma0", v); }}},
      {"solver.gamma_max",
       {[](const C& c) { return format_real(c.solver.gamma_max); },
        [](C& c, const std::string& v) { c.solver.gamma_max = parse_real("solver.gamma_max", v); }}},
      {"solver.rho",
       {[](const C& c) { return format_real(c.solver.rho); },
        [](C& c, const std::string& v) { c.solver.rho = parse_real("solver.rho", v); }}},
      {"solver.iters",
       {[](const C& c) { return std::to_string(c.solver.iters); },
        [](C& c, const std::string& v) { c.solver.iters = parse_int("solver.iters", v); }}},
      {"label.sigma_factor",
       {[](const C& c) { return format_real(c.label.sigma_factor); },
        [](C& c, const std::string& v) { c.label.sigma_factor = parse_real("label.sigma_factor", v); }}},
      {"weight.w_min",
       {[](const C& c) { return format_real(c.weight.w_min); },
        [](C& c, const std::string& v) { c.weight.w_min = parse_real("weight.w_min", v); }}},
      {"weight.alpha",
       {[](const C& c) { return format_real(c.weight.alpha); },
        [](C& c, const std::string& v) { c.weight.alpha = parse_real("weight.alpha", v); }}},
      {"scale.num_scales",
       {[](const C& c) { return std::to_string(c.scale.num_scales); },
        [](C& c, const std::string& v) { c.scale.num_scales = parse_int("scale.num_scales", v); }}},
      {"scale.step",
       {[](const C& c) { return format_real(c.scale.scale_step); },
        [](C& c, const std::string& v) { c.scale.scale_step = parse_real("scale.step", v); }}},
      {"scale.lr",
       {[](const C& c) { return format_real(c.scale.scale_lr); },
        [](C& c, const std::string& v) { c.scale.scale_lr = parse_real("scale.lr", v); }}},
      {"scale.penalty_eps",
       {[](const C& c) { return format_real(c.scale.penalty_eps); },
        [](C& c, const std::string& v) { c.scale.penalty_eps = parse_real("scale.penalty_eps", v); }}},
      {"update.mode",
       {[](const C& c) { return std::string(c.mode == UpdateMode::TemporalRegularized ? "strcf" : "interp"); },
        [](C& c, const std::string& v) {
          if (v == "strcf") c.mode = UpdateMode::TemporalRegularized;
          else if (v == "interp") c.mode = UpdateMode::LinearInterpolation;
          else throw Error(ErrorKind::Config, "update.mode: expected strcf|interp, got '" + v + "'");
        }}},
      {"update.interp_rate",
       {[](const C& c) { return format_real(c.interp_rate); },
        [](C& c, const std::string& v) { c.interp_rate = parse_real("update.interp_rate", v); }}},
  };
  return fields;
}

}  // namespace detail

/// One "key=value" line per tunable, keys sorted.
inline std::string dump_config(const TrackerConfig& cfg) {
  std::ostringstream out;
  for (const auto& [key, field] : detail::config_fields()) out << key << '=' << field.get(cfg) << '\n';
  return out.str();
}

/// Starts from `base` (the defaults unless given) and applies every line.
inline TrackerConfig parse_config(std::istream& in, TrackerConfig base = {}) {
  const auto& fields = detail::config_fields();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const auto it = fields.find(key);
    if (it == fields.end()) throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    it->second.set(base, value);
  }
  base.validate();
  return base;
}

inline TrackerConfig parse_config(const std::string& text, TrackerConfig base = {}) {
  std::istringstream in(text);
  return parse_config(in, std::move(base));
}

inline TrackerConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + path.string());
  return parse_config(in);
}

}  // namespace strcf
