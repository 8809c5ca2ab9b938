#pragma once

#include <span>
#include <vector>

#include "fctrack/association.hpp"
#include "fctrack/correction.hpp"

namespace fctrack {

struct CorrectionConfig {
  CorrectionThresholds thresholds;
  Similarity similarity = Similarity::cosine;
  bool stage1 = true;
  bool stage2 = true;

  bool enabled() const { return stage1 || stage2; }
};

struct TrackerConfig {
  double conf_split = 0.6;
  double init_confidence = 0.7;
  int max_lost_frames = 30;
  int confirm_hits = 2;
  double appearance_weight = 0.25;
  double max_cost = 0.8;
  double feature_momentum = 0.9;
  double init_iou_suppress = 0.5;
  CorrectionConfig correction;

  AssociationConfig association() const {
    AssociationConfig a;
    a.conf_split = conf_split;
    a.high = StageConfig{appearance_weight, max_cost};
    a.low = StageConfig{0.0, max_cost};
    return a;
  }

  LifecycleParams lifecycle() const {
    return LifecycleParams{init_confidence, max_lost_frames, confirm_hits, feature_momentum,
                           init_iou_suppress};
  }
};

struct TrackOutput {
  int frame = 0;
  TrackId id = 0;
  BoundingBox box{0, 0, 1, 1};
  double confidence = 0.0;
};

struct RunStats {
  int frames = 0;
  int detections = 0;
  int tracklets_created = 0;
  int reassignments_stage1 = 0;
  int reassignments_stage2 = 0;
  int displaced_detections = 0;
  int overlap_pairs = 0;  // summed over frames
};

/// Per-sequence tracking pipeline: predict, two-stage association with the correction
/// hook after each stage, lifecycle, end-of-frame overlap bookkeeping. Not thread-safe;
/// one instance per sequence.
class OnlineTracker {
 public:
  explicit OnlineTracker(TrackerConfig config) : config_(std::move(config)) {}

  std::vector<TrackOutput> step(int frame, std::span<const Detection> detections) {
    ++stats_.frames;
    last_reassignments_.clear();
    stats_.detections += static_cast<int>(detections.size());
    for (auto& t : tracklets_) {
      t.motion = predict(t.motion);
      ++t.age;
    }

    // Pairs are only valid for the frame right after the one they were formed in.
    const bool pairs_fresh = pairs_.formed_at_frame == frame - 1 && !pairs_.empty();
    std::vector<FeatureVector> features;
    if (pairs_fresh && config_.correction.enabled()) {
      features.reserve(detections.size());
      for (const auto& d : detections) features.push_back(d.feature);
    }

    auto hook = [&](int stage, MatchSet& ms, std::span<const std::size_t> stage_dets) {
      const bool on = stage == 1 ? config_.correction.stage1 : config_.correction.stage2;
      if (!on || !pairs_fresh || stage_dets.empty()) return;
      auto res = correct_matches(std::move(ms), pairs_, store_, features,
                                 config_.correction.thresholds, config_.correction.similarity,
                                 stage_dets);
      ms = std::move(res.matches);
      auto& counter = stage == 1 ? stats_.reassignments_stage1 : stats_.reassignments_stage2;
      counter += static_cast<int>(res.reassignments.size());
      for (const auto& r : res.reassignments) {
        if (r.displaced) ++stats_.displaced_detections;
        last_reassignments_.push_back(r);
      }
    };
    const MatchSet ms =
        two_stage_associate(std::span<const Tracklet>(tracklets_), detections,
                            config_.association(), hook);

    auto life = lifecycle_step(std::move(tracklets_), detections, ms, config_.lifecycle(),
                               next_id_);
    tracklets_ = std::move(life.tracklets);
    stats_.tracklets_created += static_cast<int>(life.created.size());

    auto book = end_of_frame_bookkeeping(tracklets_, std::move(store_), life.created,
                                         config_.correction.thresholds, frame);
    store_ = std::move(book.store);
    pairs_ = std::move(book.pairs);
    stats_.overlap_pairs += static_cast<int>(pairs_.size());

    std::vector<TrackOutput> out;
    for (const auto& t : tracklets_) {
      if (t.status == TrackStatus::confirmed && t.time_since_update == 0) {
        out.push_back(TrackOutput{frame, t.id, t.last_box, t.last_confidence});
      }
    }
    return out;
  }

  const std::vector<Tracklet>& tracklets() const { return tracklets_; }
  const AppearanceStore& store() const { return store_; }
  const OverlapPairSet& pairs() const { return pairs_; }
  const RunStats& stats() const { return stats_; }
  // Reassignments made during the most recent step, in application order.
  const std::vector<Reassignment>& last_reassignments() const { return last_reassignments_; }
  const TrackerConfig& config() const { return config_; }

 private:
  TrackerConfig config_;
  std::vector<Tracklet> tracklets_;  // ascending by id
  AppearanceStore store_;
  OverlapPairSet pairs_;
  TrackId next_id_ = 1;
  RunStats stats_;
  std::vector<Reassignment> last_reassignments_;
};

}  // namespace fctrack
