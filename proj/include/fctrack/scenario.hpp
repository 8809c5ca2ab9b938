#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fctrack/appearance.hpp"
#include "fctrack/association.hpp"
#include "fctrack/error.hpp"
#include "fctrack/evaluation.hpp"
#include "fctrack/geometry.hpp"
#include "fctrack/rng.hpp"

namespace fctrack {

/// Agent center at a given frame. Between waypoints the agent moves in a straight line at
/// constant speed; before the first and after the last it stands still.
struct Waypoint {
  int frame = 1;
  double x = 0.0;
  double y = 0.0;
};

struct AgentSpec {
  std::vector<Waypoint> path;
  double width = 40.0;
  double height = 100.0;
  int depth = 0;  // smaller is nearer to the camera; nearer agents occlude farther ones
  int first_frame = 1;
  int last_frame = -1;  // -1: until the end of the sequence
};

/// Forces agents a and b to overlap with directional IoA >= target_ioa on at least three
/// frames of [first_frame, last_frame].
struct CrossingEvent {
  int agent_a = 0;
  int agent_b = 1;
  int first_frame = 1;
  int last_frame = 1;
  double target_ioa = 0.8;
};

struct DetectorNoise {
  double box_jitter_std = 0.0;  // pixels, applied to center and size
  double miss_prob = 0.0;
  double occluded_miss_prob = 0.0;  // replaces miss_prob while occluded
  double conf_mean = 0.9;
  double conf_std = 0.0;
  double occluded_conf_drop = 0.0;  // confidence loss per unit of covered area
};

struct EmbeddingModel {
  int dim = 128;
  double noise_std = 0.0;        // per component, before normalisation
  double occlusion_blend = 0.5;  // weight of the occluder's anchor in an occluded embedding
  double occlusion_ioa = 0.5;    // covered fraction above which an agent counts as occluded
};

struct ScenarioSpec {
  std::string name = "synthetic";
  int n_frames = 100;
  double arena_width = 1920.0;
  double arena_height = 1080.0;
  double frame_rate = 30.0;
  std::vector<AgentSpec> agents;
  std::vector<CrossingEvent> crossings;
  DetectorNoise noise;
  EmbeddingModel embedding;
  std::uint64_t seed = 0;

  void validate() const {
    auto prob = [](double p, const char* what) {
      if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string(what) + " must lie in [0, 1]");
    };
    if (n_frames < 1) throw InputError("n_frames must be >= 1");
    if (!(arena_width > 0.0 && arena_height > 0.0)) throw InputError("arena must be non-empty");
    if (!(frame_rate > 0.0)) throw InputError("frame_rate must be positive");
    prob(noise.miss_prob, "miss_prob");
    prob(noise.occluded_miss_prob, "occluded_miss_prob");
    prob(embedding.occlusion_blend, "occlusion_blend");
    prob(embedding.occlusion_ioa, "occlusion_ioa");
    if (noise.box_jitter_std < 0.0 || noise.conf_std < 0.0 || embedding.noise_std < 0.0) {
      throw InputError("noise standard deviations must be >= 0");
    }
    if (embedding.dim < 1 || embedding.dim > 255) throw InputError("embedding dim must be 1..255");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const auto& a = agents[i];
      if (a.path.empty()) throw InputError("agent " + std::to_string(i) + " has no waypoints");
      if (!(a.width > 0.0 && a.height > 0.0)) {
        throw InputError("agent " + std::to_string(i) + " has a non-positive box size");
      }
      for (std::size_t k = 1; k < a.path.size(); ++k) {
        if (a.path[k].frame <= a.path[k - 1].frame) {
          throw InputError("agent " + std::to_string(i) + " waypoints are not increasing in frame");
        }
      }
    }
    for (std::size_t k = 0; k < crossings.size(); ++k) {
      const auto& c = crossings[k];
      const auto n = static_cast<int>(agents.size());
      if (c.agent_a < 0 || c.agent_a >= n || c.agent_b < 0 || c.agent_b >= n ||
          c.agent_a == c.agent_b) {
        throw InputError("crossing event " + std::to_string(k) + " names invalid agents");
      }
      if (c.first_frame < 1 || c.last_frame > n_frames || c.first_frame > c.last_frame) {
        throw InputError("crossing event " + std::to_string(k) + " window lies outside [1, " +
                         std::to_string(n_frames) + "]");
      }
    }
  }
};

struct SequenceMeta {
  std::string name;
  double frame_rate = 30.0;
  int n_frames = 0;
  int image_width = 0;
  int image_height = 0;
  int dim = 0;
};

struct SequenceBundle {
  TrajectorySet gt;
  std::map<TrackId, std::map<int, double>> visibility;  // per GT box
  std::vector<std::vector<Detection>> detections;       // index = frame - 1
  SequenceMeta meta;
};

namespace detail {

inline double round_to(double v, double scale) { return std::round(v * scale) / scale; }

inline std::pair<double, double> position_at(const AgentSpec& a, int frame) {
  const auto& p = a.path;
  if (frame <= p.front().frame) return {p.front().x, p.front().y};
  if (frame >= p.back().frame) return {p.back().x, p.back().y};
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (frame <= p[k].frame) {
      const double t =
          static_cast<double>(frame - p[k - 1].frame) / static_cast<double>(p[k].frame - p[k - 1].frame);
      return {p[k - 1].x + t * (p[k].x - p[k - 1].x), p[k - 1].y + t * (p[k].y - p[k - 1].y)};
    }
  }
  return {p.back().x, p.back().y};
}

// Box clipped to the arena and rounded to file precision; nullopt when too little is left.
inline std::optional<BoundingBox> arena_box(double cx, double cy, double w, double h,
                                            double arena_w, double arena_h) {
  const double l = round_to(std::clamp(cx - w / 2.0, 0.0, arena_w), 100.0);
  const double t = round_to(std::clamp(cy - h / 2.0, 0.0, arena_h), 100.0);
  const double r = round_to(std::clamp(cx + w / 2.0, 0.0, arena_w), 100.0);
  const double b = round_to(std::clamp(cy + h / 2.0, 0.0, arena_h), 100.0);
  if (r - l < 1.0 || b - t < 1.0) return std::nullopt;
  return BoundingBox(l, t, round_to(r - l, 100.0), round_to(b - t, 100.0));
}

inline std::vector<double> unit_anchor(std::uint64_t seed, int agent, int dim) {
  Rng rng(seed, Stream::anchor, {static_cast<std::uint64_t>(agent)});
  std::vector<double> v(dim);
  double sq = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    sq += x * x;
  }
  const double n = std::sqrt(sq);
  for (auto& x : v) x /= n;
  return v;
}

}  // namespace detail

inline std::optional<BoundingBox> agent_box(const ScenarioSpec& spec, int agent, int frame) {
  const auto& a = spec.agents[agent];
  const int last = a.last_frame < 0 ? spec.n_frames : a.last_frame;
  if (frame < a.first_frame || frame > last) return std::nullopt;
  const auto [x, y] = detail::position_at(a, frame);
  return detail::arena_box(x, y, a.width, a.height, spec.arena_width, spec.arena_height);
}

/// Ground truth plus noisy detections with occlusion-contaminated embeddings.
/// Deterministic in spec.seed.
inline SequenceBundle generate(const ScenarioSpec& spec) {
  spec.validate();
  const int n_agents = static_cast<int>(spec.agents.size());
  const int dim = spec.embedding.dim;

  std::vector<std::vector<std::optional<BoundingBox>>> boxes(
      spec.n_frames + 1, std::vector<std::optional<BoundingBox>>(n_agents));
  for (int f = 1; f <= spec.n_frames; ++f) {
    for (int a = 0; a < n_agents; ++a) boxes[f][a] = agent_box(spec, a, f);
  }

  for (std::size_t k = 0; k < spec.crossings.size(); ++k) {
    const auto& c = spec.crossings[k];
    int hits = 0;
    for (int f = c.first_frame; f <= c.last_frame; ++f) {
      const auto& ba = boxes[f][c.agent_a];
      const auto& bb = boxes[f][c.agent_b];
      if (!ba || !bb) continue;
      if (std::max(ioa(*ba, *bb), ioa(*bb, *ba)) >= c.target_ioa) ++hits;
    }
    if (hits < 3) {
      throw InputError("crossing event " + std::to_string(k) + " (agents " +
                       std::to_string(c.agent_a) + " and " + std::to_string(c.agent_b) +
                       ") reaches the target IoA on " + std::to_string(hits) +
                       " frame(s) of [" + std::to_string(c.first_frame) + ", " +
                       std::to_string(c.last_frame) + "], need 3");
    }
  }

  std::vector<std::vector<double>> anchors;
  for (int a = 0; a < n_agents; ++a) anchors.push_back(detail::unit_anchor(spec.seed, a, dim));

  SequenceBundle out;
  out.meta = SequenceMeta{spec.name,
                          spec.frame_rate,
                          spec.n_frames,
                          static_cast<int>(std::lround(spec.arena_width)),
                          static_cast<int>(std::lround(spec.arena_height)),
                          dim};
  out.detections.resize(spec.n_frames);

  for (int f = 1; f <= spec.n_frames; ++f) {
    auto& frame_dets = out.detections[f - 1];
    for (int a = 0; a < n_agents; ++a) {
      const auto& box = boxes[f][a];
      if (!box) continue;
      const TrackId gt_id = a + 1;
      out.gt.add(gt_id, f, *box);

      // Most covering nearer agent.
      double cover = 0.0;
      int occluder = -1;
      for (int o = 0; o < n_agents; ++o) {
        if (o == a || !boxes[f][o] || spec.agents[o].depth >= spec.agents[a].depth) continue;
        const double c = ioa(*box, *boxes[f][o]);
        if (c > cover) {
          cover = c;
          occluder = o;
        }
      }
      out.visibility[gt_id][f] = detail::round_to(1.0 - cover, 100.0);
      const bool occluded = occluder >= 0 && cover >= spec.embedding.occlusion_ioa;

      Rng rng(spec.seed, Stream::detection,
              {static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(f)});
      const double p_miss = occluded ? spec.noise.occluded_miss_prob : spec.noise.miss_prob;
      const bool missed = rng.bernoulli(p_miss);

      const double js = spec.noise.box_jitter_std;
      const double cx = box->center_x() + js * rng.normal();
      const double cy = box->center_y() + js * rng.normal();
      const double w = std::max(2.0, box->width() + js * rng.normal());
      const double h = std::max(2.0, box->height() + js * rng.normal());
      double conf = rng.normal(spec.noise.conf_mean, spec.noise.conf_std) -
                    spec.noise.occluded_conf_drop * cover;
      conf = detail::round_to(std::clamp(conf, 0.01, 1.0), 10000.0);

      const auto& own = anchors[a];
      const double blend = occluded ? spec.embedding.occlusion_blend : 0.0;
      std::vector<double> e(dim);
      double sq = 0.0;
      for (int i = 0; i < dim; ++i) {
        e[i] = (1.0 - blend) * own[i] + (occluded ? blend * anchors[occluder][i] : 0.0) +
               spec.embedding.noise_std * rng.normal();
        sq += e[i] * e[i];
      }
      if (missed) continue;
      const double n = std::sqrt(sq);
      std::vector<float> feat(dim);
      for (int i = 0; i < dim; ++i) feat[i] = static_cast<float>(e[i] / n);

      auto det_box = js == 0.0 ? box : detail::arena_box(cx, cy, w, h, spec.arena_width, spec.arena_height);
      if (!det_box) continue;
      Detection d;
      d.frame = f;
      d.box = *det_box;
      d.confidence = conf;
      d.feature = FeatureVector(std::move(feat));
      d.source_index = static_cast<int>(frame_dets.size());
      frame_dets.push_back(std::move(d));
    }
  }
  return out;
}

}  // namespace fctrack
