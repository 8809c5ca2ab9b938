#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

#include "fctrack/error.hpp"
#include "fctrack/scenario.hpp"

// JSON form of ScenarioSpec. Every object key is optional and falls back to the struct
// default; unknown keys are rejected so that a misspelt field cannot go unnoticed.
//
// {
//   "name": "two-cross", "n_frames": 120, "arena": [1920, 1080], "frame_rate": 30,
//   "seed": 7,
//   "agents": [{"path": [[1, 200, 500], [120, 1700, 500]], "width": 50, "height": 120,
//               "depth": 0, "first_frame": 1, "last_frame": -1}, ...],
//   "crossings": [{"agents": [0, 1], "window": [50, 70], "target_ioa": 0.8}],
//   "noise": {"box_jitter_std": 1, "miss_prob": 0.02, "occluded_miss_prob": 0.3,
//             "conf_mean": 0.85, "conf_std": 0.05, "occluded_conf_drop": 0.3},
//   "embedding": {"dim": 128, "noise_std": 0.05, "occlusion_blend": 0.6, "occlusion_ioa": 0.5}
// }

namespace fctrack {

namespace detail {

using nlohmann::json;

inline void expect_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw InputError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw InputError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw InputError(where + "." + key + " has the wrong type");
  }
}

}  // namespace detail

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  using detail::read_opt;
  detail::expect_keys(j, "scenario",
                      {"name", "n_frames", "arena", "frame_rate", "seed", "agents", "crossings", "noise",
                       "embedding"});
  ScenarioSpec s;
  read_opt(j, "name", s.name, "scenario");
  read_opt(j, "n_frames", s.n_frames, "scenario");
  read_opt(j, "frame_rate", s.frame_rate, "scenario");
  read_opt(j, "seed", s.seed, "scenario");
  if (auto it = j.find("arena"); it != j.end()) {
    if (!it->is_array() || it->size() != 2) throw InputError("scenario.arena must be [width, height]");
    s.arena_width = (*it)[0].get<double>();
    s.arena_height = (*it)[1].get<double>();
  }
  if (auto it = j.find("agents"); it != j.end()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& ja = (*it)[i];
      const std::string where = "agents[" + std::to_string(i) + "]";
      detail::expect_keys(ja, where, {"path", "width", "height", "depth", "first_frame", "last_frame"});
      AgentSpec a;
      read_opt(ja, "width", a.width, where);
      read_opt(ja, "height", a.height, where);
      read_opt(ja, "depth", a.depth, where);
      read_opt(ja, "first_frame", a.first_frame, where);
      read_opt(ja, "last_frame", a.last_frame, where);
      if (auto p = ja.find("path"); p != ja.end()) {
        for (const auto& w : *p) {
          if (!w.is_array() || w.size() != 3) throw InputError(where + ".path entries must be [frame, x, y]");
          a.path.push_back(Waypoint{w[0].get<int>(), w[1].get<double>(), w[2].get<double>()});
        }
      }
      s.agents.push_back(std::move(a));
    }
  }
  if (auto it = j.find("crossings"); it != j.end()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& jc = (*it)[i];
      const std::string where = "crossings[" + std::to_string(i) + "]";
      detail::expect_keys(jc, where, {"agents", "window", "target_ioa"});
      CrossingEvent c;
      const auto& ag = jc.at("agents");
      const auto& win = jc.at("window");
      if (ag.size() != 2 || win.size() != 2) throw InputError(where + " needs agents [a, b] and window [first, last]");
      c.agent_a = ag[0].get<int>();
      c.agent_b = ag[1].get<int>();
      c.first_frame = win[0].get<int>();
      c.last_frame = win[1].get<int>();
      read_opt(jc, "target_ioa", c.target_ioa, where);
      s.crossings.push_back(c);
    }
  }
  if (auto it = j.find("noise"); it != j.end()) {
    detail::expect_keys(*it, "noise",
                        {"box_jitter_std", "miss_prob", "occluded_miss_prob", "conf_mean", "conf_std",
                         "occluded_conf_drop"});
    read_opt(*it, "box_jitter_std", s.noise.box_jitter_std, "noise");
    read_opt(*it, "miss_prob", s.noise.miss_prob, "noise");
    read_opt(*it, "occluded_miss_prob", s.noise.occluded_miss_prob, "noise");
    read_opt(*it, "conf_mean", s.noise.conf_mean, "noise");
    read_opt(*it, "conf_std", s.noise.conf_std, "noise");
    read_opt(*it, "occluded_conf_drop", s.noise.occluded_conf_drop, "noise");
  }
  if (auto it = j.find("embedding"); it != j.end()) {
    detail::expect_keys(*it, "embedding", {"dim", "noise_std", "occlusion_blend", "occlusion_ioa"});
    read_opt(*it, "dim", s.embedding.dim, "embedding");
    read_opt(*it, "noise_std", s.embedding.noise_std, "embedding");
    read_opt(*it, "occlusion_blend", s.embedding.occlusion_blend, "embedding");
    read_opt(*it, "occlusion_ioa", s.embedding.occlusion_ioa, "embedding");
  }
  s.validate();
  return s;
}

inline nlohmann::json scenario_to_json(const ScenarioSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["n_frames"] = s.n_frames;
  j["arena"] = {s.arena_width, s.arena_height};
  j["frame_rate"] = s.frame_rate;
  j["seed"] = s.seed;
  j["agents"] = nlohmann::json::array();
  for (const auto& a : s.agents) {
    nlohmann::json ja;
    ja["path"] = nlohmann::json::array();
    for (const auto& w : a.path) ja["path"].push_back({w.frame, w.x, w.y});
    ja["width"] = a.width;
    ja["height"] = a.height;
    ja["depth"] = a.depth;
    ja["first_frame"] = a.first_frame;
    ja["last_frame"] = a.last_frame;
    j["agents"].push_back(std::move(ja));
  }
  j["crossings"] = nlohmann::json::array();
  for (const auto& c : s.crossings) {
    j["crossings"].push_back({{"agents", {c.agent_a, c.agent_b}},
                              {"window", {c.first_frame, c.last_frame}},
                              {"target_ioa", c.target_ioa}});
  }
  j["noise"] = {{"box_jitter_std", s.noise.box_jitter_std},
                {"miss_prob", s.noise.miss_prob},
                {"occluded_miss_prob", s.noise.occluded_miss_prob},
                {"conf_mean", s.noise.conf_mean},
                {"conf_std", s.noise.conf_std},
                {"occluded_conf_drop", s.noise.occluded_conf_drop}};
  j["embedding"] = {{"dim", s.embedding.dim},
                    {"noise_std", s.embedding.noise_std},
                    {"occlusion_blend", s.embedding.occlusion_blend},
                    {"occlusion_ioa", s.embedding.occlusion_ioa}};
  return j;
}

inline ScenarioSpec parse_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("scenario JSON: ") + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("scenario JSON: ") + e.what());
  }
}

inline ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace fctrack
