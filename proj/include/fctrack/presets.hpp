#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "fctrack/rng.hpp"
#include "fctrack/scenario.hpp"

// Seeded scenario families used by the acceptance suite and the `gen` command.

namespace fctrack {

struct CrossingPreset {
  int n_frames = 150;
  int min_agents = 2;
  int max_agents = 6;
  double min_blend = 0.5;
  double max_blend = 0.7;
  double min_speed = 3.0;  // pixels per frame
  double max_speed = 6.0;
  int min_dwell = 0;  // frames a pair lingers at the meeting point
  int max_dwell = 20;
  double min_far_scale = 0.8;  // height of the farther agent relative to the nearer one
  double max_far_scale = 0.92;
  double turn_back_prob = 0.5;
  DetectorNoise noise{1.0, 0.02, 0.3, 0.85, 0.05, 0.3};
  double embedding_noise = 0.05;
  int dim = 128;
};

/// Agents meet in pairs: each pair walks towards a common point, lingers there overlapping
/// for a few frames, and walks off in new, independent directions. The nearer agent of a
/// pair occludes the farther one, whose detections then carry a blended embedding.
inline ScenarioSpec make_crossing_scenario(std::uint64_t seed, int index,
                                           const CrossingPreset& p = {}) {
  Rng rng(seed, Stream::layout, {static_cast<std::uint64_t>(index)});
  ScenarioSpec s;
  s.name = "crossing-" + std::to_string(index);
  s.n_frames = p.n_frames;
  s.seed = stream_seed(seed, Stream::layout, {static_cast<std::uint64_t>(index), 1});
  s.noise = p.noise;
  s.embedding.dim = p.dim;
  s.embedding.noise_std = p.embedding_noise;
  s.embedding.occlusion_blend = rng.uniform(p.min_blend, p.max_blend);
  s.embedding.occlusion_ioa = 0.5;

  const int n = rng.uniform_int(p.min_agents, p.max_agents);
  std::vector<int> depth(n);
  for (int i = 0; i < n; ++i) depth[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(depth[i], depth[rng.uniform_int(0, i)]);

  const double margin = 120.0;
  auto clamp_x = [&](double x) { return std::clamp(x, margin, s.arena_width - margin); };
  auto clamp_y = [&](double y) { return std::clamp(y, margin, s.arena_height - margin); };

  for (int a = 0; a + 1 < n; a += 2) {
    const int b = a + 1;
    const int near = depth[a] < depth[b] ? a : b;
    const int far = near == a ? b : a;
    const double h_near = rng.uniform(110.0, 160.0);
    const double h_far = h_near * rng.uniform(p.min_far_scale, p.max_far_scale);
    const double aspect = rng.uniform(0.38, 0.45);

    const int meet = rng.uniform_int(s.n_frames / 3, 2 * s.n_frames / 3);
    const int dwell = rng.uniform_int(p.min_dwell, p.max_dwell);
    const double cx = rng.uniform(500.0, s.arena_width - 500.0);
    const double cy = rng.uniform(350.0, s.arena_height - 350.0);

    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double in_speed[2] = {rng.uniform(p.min_speed, p.max_speed), rng.uniform(p.min_speed, p.max_speed)};
    const double in_dir[2] = {heading, heading + std::numbers::pi + rng.uniform(-0.5, 0.5)};
    // Half of the pairs turn back where they came from, the rest leave at random.
    const bool turn_back = rng.bernoulli(p.turn_back_prob);
    double out_dir[2];
    for (int k = 0; k < 2; ++k) {
      out_dir[k] = turn_back ? in_dir[k] + std::numbers::pi + rng.uniform(-0.3, 0.3)
                             : rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    const double out_speed[2] = {rng.uniform(p.min_speed, p.max_speed), rng.uniform(p.min_speed, p.max_speed)};
    const double dy_far = rng.uniform(-0.04, 0.04) * h_far;

    for (int k = 0; k < 2; ++k) {
      const int agent = k == 0 ? a : b;
      AgentSpec spec;
      spec.depth = depth[agent];
      spec.height = agent == near ? h_near : h_far;
      spec.width = spec.height * aspect;
      const double oy = agent == far ? dy_far : 0.0;
      // Points walking into the meeting point are measured backwards from it, so the path
      // reaches (cx, cy) at `meet` regardless of clamping at the start.
      const double sx = clamp_x(cx - std::cos(in_dir[k]) * in_speed[k] * (meet - 1));
      const double sy = clamp_y(cy + oy - std::sin(in_dir[k]) * in_speed[k] * (meet - 1));
      const int leave = meet + dwell;
      const double drift = rng.uniform(-1.0, 1.0);
      const double ex = clamp_x(cx + drift + std::cos(out_dir[k]) * out_speed[k] * (s.n_frames - leave));
      const double ey = clamp_y(cy + oy + std::sin(out_dir[k]) * out_speed[k] * (s.n_frames - leave));
      spec.path = {Waypoint{1, sx, sy}, Waypoint{meet, cx, cy + oy}};
      if (leave > meet) spec.path.push_back(Waypoint{leave, cx + drift, cy + oy});
      spec.path.push_back(Waypoint{s.n_frames, ex, ey});
      s.agents.push_back(std::move(spec));
    }
    s.crossings.push_back(CrossingEvent{a, b, std::max(1, meet - 10),
                                        std::min(s.n_frames, meet + dwell + 10), 0.8});
  }
  if (n % 2 == 1) {
    AgentSpec lone;
    lone.depth = depth[n - 1];
    lone.height = rng.uniform(110.0, 160.0);
    lone.width = lone.height * rng.uniform(0.38, 0.45);
    const double y = rng.uniform(200.0, s.arena_height - 200.0);
    const double x0 = rng.uniform(200.0, 600.0);
    lone.path = {Waypoint{1, x0, y}, Waypoint{s.n_frames, x0 + rng.uniform(1.0, 3.0) * s.n_frames, y}};
    s.agents.push_back(std::move(lone));
  }
  return s;
}

/// Agents walk along separated horizontal lanes; boxes never intersect.
inline ScenarioSpec make_open_scenario(std::uint64_t seed, int index, const CrossingPreset& p = {}) {
  Rng rng(seed, Stream::layout, {static_cast<std::uint64_t>(index), 0x0BE2});
  ScenarioSpec s;
  s.name = "open-" + std::to_string(index);
  s.n_frames = p.n_frames;
  s.seed = stream_seed(seed, Stream::layout, {static_cast<std::uint64_t>(index), 2});
  s.noise = p.noise;
  s.embedding.dim = p.dim;
  s.embedding.noise_std = p.embedding_noise;
  s.embedding.occlusion_blend = rng.uniform(p.min_blend, p.max_blend);

  const int n = rng.uniform_int(p.min_agents, p.max_agents);
  const double lane = (s.arena_height - 40.0) / n;
  for (int i = 0; i < n; ++i) {
    AgentSpec a;
    a.depth = i;
    a.height = std::min(lane * 0.5, rng.uniform(70.0, 140.0));
    a.width = a.height * rng.uniform(0.38, 0.45);
    const double y = 20.0 + lane * (i + 0.5);
    const double speed = rng.uniform(1.0, 4.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    const double x0 = speed > 0 ? rng.uniform(100.0, 400.0) : rng.uniform(1500.0, 1800.0);
    a.path = {Waypoint{1, x0, y}, Waypoint{s.n_frames, x0 + speed * (s.n_frames - 1), y}};
    s.agents.push_back(std::move(a));
  }
  return s;
}

}  // namespace fctrack
