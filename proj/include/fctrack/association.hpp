#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fctrack/appearance.hpp"
#include "fctrack/assignment.hpp"
#include "fctrack/geometry.hpp"
#include "fctrack/kalman.hpp"

namespace fctrack {

struct Detection {
  int frame = 0;
  BoundingBox box{0, 0, 1, 1};
  double confidence = 0.0;
  FeatureVector feature;
  int source_index = 0;  // ordinal within the frame's detection lines
};

enum class TrackStatus { tentative, confirmed, lost };

struct Tracklet {
  TrackId id = 0;
  MotionState motion;
  BoundingBox last_box{0, 0, 1, 1};
  TrackStatus status = TrackStatus::tentative;
  int age = 0;                // frames since initialisation
  int time_since_update = 0;  // 0 iff matched this frame
  int hits = 0;               // consecutive matches, including the initialising detection
  FeatureVector current_feature;  // feature of the latest matched detection
  FeatureVector appearance;       // running appearance model used by the associator
  double last_confidence = 0.0;
};

/// Detection indices refer to the frame's detection list.
struct Match {
  std::size_t detection = 0;
  TrackId tracklet = 0;
  bool operator==(const Match&) const = default;
};

struct MatchSet {
  std::vector<Match> matches;  // ascending by tracklet id
  std::vector<std::size_t> unmatched_detections;
  std::vector<TrackId> unmatched_tracklets;

  std::optional<std::size_t> detection_of(TrackId id) const {
    for (const auto& m : matches) {
      if (m.tracklet == id) return m.detection;
    }
    return std::nullopt;
  }

  std::optional<TrackId> tracklet_of(std::size_t det) const {
    for (const auto& m : matches) {
      if (m.detection == det) return m.tracklet;
    }
    return std::nullopt;
  }

  bool knows_tracklet(TrackId id) const {
    return detection_of(id).has_value() ||
           std::find(unmatched_tracklets.begin(), unmatched_tracklets.end(), id) !=
               unmatched_tracklets.end();
  }

  void normalize() {
    std::sort(matches.begin(), matches.end(),
              [](const Match& a, const Match& b) { return a.tracklet < b.tracklet; });
    std::sort(unmatched_detections.begin(), unmatched_detections.end());
    std::sort(unmatched_tracklets.begin(), unmatched_tracklets.end());
  }

  bool operator==(const MatchSet&) const = default;
};

/// Checks the partition invariants: every detection in [0, n_detections) and every id in
/// `tracklets` appears exactly once across the match set's fields.
inline bool is_valid_partition(const MatchSet& ms, std::size_t n_detections,
                               std::span<const TrackId> tracklets) {
  std::vector<int> det_seen(n_detections, 0);
  std::vector<TrackId> trk_seen;
  for (const auto& m : ms.matches) {
    if (m.detection >= n_detections) return false;
    ++det_seen[m.detection];
    trk_seen.push_back(m.tracklet);
  }
  for (auto d : ms.unmatched_detections) {
    if (d >= n_detections) return false;
    ++det_seen[d];
  }
  for (auto t : ms.unmatched_tracklets) trk_seen.push_back(t);
  if (std::any_of(det_seen.begin(), det_seen.end(), [](int c) { return c != 1; })) return false;
  std::sort(trk_seen.begin(), trk_seen.end());
  std::vector<TrackId> expected(tracklets.begin(), tracklets.end());
  std::sort(expected.begin(), expected.end());
  return trk_seen == expected;
}

/// cost(i, j) = (1 - w) (1 - IoU) + w d / d_max, gated when the boxes do not overlap.
/// Tracklet boxes are taken at the current motion mean.
inline CostMatrix build_cost_matrix(std::span<const Tracklet* const> tracklets,
                                    std::span<const Detection* const> detections,
                                    double appearance_weight, Similarity similarity) {
  CostMatrix cost(static_cast<Eigen::Index>(tracklets.size()),
                  static_cast<Eigen::Index>(detections.size()));
  const double d_max = max_distance(similarity);
  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    const BoundingBox predicted = state_box(tracklets[i]->motion);
    for (std::size_t j = 0; j < detections.size(); ++j) {
      const double overlap = iou(predicted, detections[j]->box);
      double c = kGated;
      if (overlap > 0.0) {
        c = (1.0 - appearance_weight) * (1.0 - overlap);
        if (appearance_weight > 0.0) {
          const double d =
              distance(similarity, tracklets[i]->appearance, detections[j]->feature);
          c += appearance_weight * std::min(1.0, d / d_max);
        }
      }
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
    }
  }
  return cost;
}

struct StageConfig {
  double appearance_weight = 0.25;
  double max_cost = 0.8;
};

struct AssociationConfig {
  double conf_split = 0.6;
  StageConfig high{0.25, 0.8};
  StageConfig low{0.0, 0.8};
  Similarity similarity = Similarity::cosine;
};

namespace detail {

inline void assign_stage(MatchSet& out, std::span<const Tracklet> all,
                         const std::vector<TrackId>& pool_ids,
                         std::span<const Detection> detections,
                         const std::vector<std::size_t>& det_pool, const StageConfig& stage,
                         Similarity similarity) {
  std::vector<const Tracklet*> trk;
  for (TrackId id : pool_ids) {
    for (const auto& t : all) {
      if (t.id == id) {
        trk.push_back(&t);
        break;
      }
    }
  }
  std::vector<const Detection*> det;
  for (auto d : det_pool) det.push_back(&detections[d]);

  const CostMatrix cost = build_cost_matrix(trk, det, stage.appearance_weight, similarity);
  const Assignment a = hungarian_assign(cost, stage.max_cost);

  std::vector<char> trk_matched(trk.size(), 0);
  std::vector<char> det_matched(det.size(), 0);
  for (auto [r, c] : a.pairs) {
    out.matches.push_back(Match{det_pool[c], trk[r]->id});
    trk_matched[r] = 1;
    det_matched[c] = 1;
  }
  std::erase_if(out.unmatched_tracklets, [&](TrackId id) {
    for (std::size_t r = 0; r < trk.size(); ++r) {
      if (trk[r]->id == id) return trk_matched[r] != 0;
    }
    return false;
  });
  std::erase_if(out.unmatched_detections, [&](std::size_t d) {
    for (std::size_t c = 0; c < det_pool.size(); ++c) {
      if (det_pool[c] == d) return det_matched[c] != 0;
    }
    return false;
  });
  out.normalize();
}

}  // namespace detail

struct NoStageHook {
  void operator()(int, MatchSet&, std::span<const std::size_t>) const {}
};

/// Stage 1 matches detections with confidence >= conf_split against every live tracklet
/// using IoU plus appearance. Stage 2 matches the remaining low-confidence detections
/// against tracklets still unmatched, by IoU alone. After each stage the hook receives the
/// frame-wide match set and the detections that took part in that stage.
template <class StageHook = NoStageHook>
MatchSet two_stage_associate(std::span<const Tracklet> tracklets,
                             std::span<const Detection> detections,
                             const AssociationConfig& cfg, StageHook&& hook = {}) {
  MatchSet ms;
  for (std::size_t d = 0; d < detections.size(); ++d) ms.unmatched_detections.push_back(d);
  for (const auto& t : tracklets) ms.unmatched_tracklets.push_back(t.id);
  ms.normalize();

  std::vector<std::size_t> high;
  std::vector<std::size_t> low;
  for (std::size_t d = 0; d < detections.size(); ++d) {
    (detections[d].confidence >= cfg.conf_split ? high : low).push_back(d);
  }

  const std::vector<TrackId> stage1_pool = ms.unmatched_tracklets;
  detail::assign_stage(ms, tracklets, stage1_pool, detections, high, cfg.high, cfg.similarity);
  hook(1, ms, std::span<const std::size_t>(high));

  const std::vector<TrackId> stage2_pool = ms.unmatched_tracklets;
  detail::assign_stage(ms, tracklets, stage2_pool, detections, low, cfg.low, cfg.similarity);
  hook(2, ms, std::span<const std::size_t>(low));
  return ms;
}

struct LifecycleParams {
  double init_confidence = 0.7;
  int max_lost_frames = 30;
  int confirm_hits = 2;
  double feature_momentum = 0.9;
  double init_iou_suppress = 0.5;  // no new tracklet over a live one with IoU >= this
};

struct LifecycleResult {
  std::vector<Tracklet> tracklets;  // ascending by id
  std::vector<TrackId> created;
  std::vector<TrackId> removed;
};

inline FeatureVector blend_features(const FeatureVector& running, const FeatureVector& fresh,
                                    double momentum) {
  if (momentum <= 0.0) return fresh;
  std::vector<float> out(running.size());
  for (std::size_t i = 0; i < running.size(); ++i) {
    out[i] = static_cast<float>(momentum * running[i] / running.norm() +
                                (1.0 - momentum) * fresh[i] / fresh.norm());
  }
  double sq = 0.0;
  for (float v : out) sq += static_cast<double>(v) * v;
  if (sq == 0.0) return fresh;
  const double n = std::sqrt(sq);
  for (float& v : out) v = static_cast<float>(v / n);
  return FeatureVector(std::move(out));
}

/// Applies a frame's match set: Kalman correction and status refresh for matched
/// tracklets, lost/removal handling for unmatched ones, and new tentative tracklets for
/// confident unmatched detections that do not sit on top of a live tracklet. Tentative
/// tracklets that miss a frame are dropped.
inline LifecycleResult lifecycle_step(std::vector<Tracklet> tracklets,
                                      std::span<const Detection> detections,
                                      const MatchSet& ms, const LifecycleParams& params,
                                      TrackId& next_id) {
  LifecycleResult out;
  for (auto& t : tracklets) {
    if (auto d = ms.detection_of(t.id)) {
      const Detection& det = detections[*d];
      t.motion = kf_update(t.motion, det.box);
      t.last_box = det.box;
      t.time_since_update = 0;
      t.hits += 1;
      t.current_feature = det.feature;
      t.appearance = blend_features(t.appearance, det.feature, params.feature_momentum);
      t.last_confidence = det.confidence;
      if (t.status == TrackStatus::lost ||
          (t.status == TrackStatus::tentative && t.hits >= params.confirm_hits)) {
        t.status = TrackStatus::confirmed;
      }
    } else {
      t.time_since_update += 1;
      t.hits = 0;
      if (t.status == TrackStatus::tentative || t.time_since_update > params.max_lost_frames) {
        out.removed.push_back(t.id);
        continue;
      }
      t.status = TrackStatus::lost;
    }
    out.tracklets.push_back(std::move(t));
  }
  std::vector<BoundingBox> live_boxes;
  for (const auto& t : out.tracklets) {
    live_boxes.push_back(t.time_since_update == 0 ? t.last_box : state_box(t.motion));
  }
  for (auto d : ms.unmatched_detections) {
    const Detection& det = detections[d];
    if (det.confidence < params.init_confidence) continue;
    const bool covered = std::any_of(live_boxes.begin(), live_boxes.end(), [&](const BoundingBox& b) {
      return iou(b, det.box) >= params.init_iou_suppress;
    });
    if (covered) continue;
    Tracklet t;
    t.id = next_id++;
    t.motion = kf_initiate(det.box);
    t.last_box = det.box;
    t.status = params.confirm_hits <= 1 ? TrackStatus::confirmed : TrackStatus::tentative;
    t.hits = 1;
    t.current_feature = det.feature;
    t.appearance = det.feature;
    t.last_confidence = det.confidence;
    out.created.push_back(t.id);
    out.tracklets.push_back(std::move(t));
  }
  return out;
}

}  // namespace fctrack
