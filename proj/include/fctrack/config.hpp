#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fctrack/error.hpp"
#include "fctrack/online_tracker.hpp"

// Flat key=value tracker configuration. '#' starts a comment. Unknown keys are errors.

namespace fctrack {

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw InputError("config key '" + std::string(key) + "': expected a number, got '" +
                     std::string(v) + "'");
  }
  return out;
}

inline int parse_int(std::string_view key, std::string_view v) {
  const double d = parse_number(key, v);
  if (d != std::floor(d)) {
    throw InputError("config key '" + std::string(key) + "': expected an integer");
  }
  return static_cast<int>(d);
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InputError("config key '" + std::string(key) + "': expected true or false, got '" +
                   std::string(v) + "'");
}

}  // namespace config_detail

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "conf_split",        "init_confidence", "max_lost_frames",   "confirm_hits",
      "appearance_weight", "max_cost",        "feature_momentum",  "init_iou_suppress",
      "tau_update",        "tau_overlap",     "tau_min",           "tau_dif",
      "similarity",        "correction_stage1", "correction_stage2"};
  return keys;
}

/// Applies one key to `cfg`. Throws InputError for unknown keys or bad values.
inline void apply_config_value(TrackerConfig& cfg, std::string_view key, std::string_view value) {
  using namespace config_detail;
  auto& th = cfg.correction.thresholds;
  if (key == "conf_split") cfg.conf_split = parse_number(key, value);
  else if (key == "init_confidence") cfg.init_confidence = parse_number(key, value);
  else if (key == "max_lost_frames") cfg.max_lost_frames = parse_int(key, value);
  else if (key == "confirm_hits") cfg.confirm_hits = parse_int(key, value);
  else if (key == "appearance_weight") cfg.appearance_weight = parse_number(key, value);
  else if (key == "max_cost") cfg.max_cost = parse_number(key, value);
  else if (key == "feature_momentum") cfg.feature_momentum = parse_number(key, value);
  else if (key == "init_iou_suppress") cfg.init_iou_suppress = parse_number(key, value);
  else if (key == "tau_update") th.tau_update = parse_number(key, value);
  else if (key == "tau_overlap") th.tau_overlap = parse_number(key, value);
  else if (key == "tau_min") th.tau_min = parse_number(key, value);
  else if (key == "tau_dif") th.tau_dif = parse_number(key, value);
  else if (key == "similarity") cfg.correction.similarity = parse_similarity(value);
  else if (key == "correction_stage1") cfg.correction.stage1 = parse_bool(key, value);
  else if (key == "correction_stage2") cfg.correction.stage2 = parse_bool(key, value);
  else throw InputError("unknown config key '" + std::string(key) + "'");
}

/// Range checks. Returns warnings that do not invalidate the configuration.
inline std::vector<std::string> validate_config(const TrackerConfig& cfg) {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(name) + " must lie in [0, 1]");
  };
  if (!(cfg.conf_split > 0.0 && cfg.conf_split < 1.0)) {
    throw InputError("conf_split must lie in (0, 1)");
  }
  unit(cfg.init_confidence, "init_confidence");
  unit(cfg.appearance_weight, "appearance_weight");
  unit(cfg.feature_momentum, "feature_momentum");
  if (cfg.max_lost_frames < 0) throw InputError("max_lost_frames must be >= 0");
  if (cfg.confirm_hits < 1) throw InputError("confirm_hits must be >= 1");
  if (!(cfg.max_cost >= 0.0)) throw InputError("max_cost must be >= 0");
  // Values above 1 switch the suppression off.
  if (!(cfg.init_iou_suppress > 0.0)) throw InputError("init_iou_suppress must be > 0");
  std::vector<std::string> warnings;
  if (auto w = cfg.correction.thresholds.validate()) warnings.push_back(*w);
  return warnings;
}

inline TrackerConfig parse_config(std::string_view text, TrackerConfig base = {}) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = config_detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_config_value(base, config_detail::trim(s.substr(0, eq)),
                         config_detail::trim(s.substr(eq + 1)));
    } catch (const InputError& e) {
      throw InputError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate_config(base);
  return base;
}

inline TrackerConfig load_config(const std::string& path, TrackerConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

inline std::string format_config(const TrackerConfig& cfg) {
  auto num = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  const auto& th = cfg.correction.thresholds;
  std::ostringstream os;
  os << "conf_split=" << num(cfg.conf_split) << '\n'
     << "init_confidence=" << num(cfg.init_confidence) << '\n'
     << "max_lost_frames=" << cfg.max_lost_frames << '\n'
     << "confirm_hits=" << cfg.confirm_hits << '\n'
     << "appearance_weight=" << num(cfg.appearance_weight) << '\n'
     << "max_cost=" << num(cfg.max_cost) << '\n'
     << "feature_momentum=" << num(cfg.feature_momentum) << '\n'
     << "init_iou_suppress=" << num(cfg.init_iou_suppress) << '\n'
     << "tau_update=" << num(th.tau_update) << '\n'
     << "tau_overlap=" << num(th.tau_overlap) << '\n'
     << "tau_min=" << num(th.tau_min) << '\n'
     << "tau_dif=" << num(th.tau_dif) << '\n'
     << "similarity=" << to_string(cfg.correction.similarity) << '\n'
     << "correction_stage1=" << (cfg.correction.stage1 ? "true" : "false") << '\n'
     << "correction_stage2=" << (cfg.correction.stage2 ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace fctrack
