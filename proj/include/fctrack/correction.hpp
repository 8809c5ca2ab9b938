#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fctrack/appearance.hpp"
#include "fctrack/association.hpp"
#include "fctrack/geometry.hpp"

namespace fctrack {

struct CorrectionThresholds {
  double tau_update = 0.3;   // IoA at or above which stored features stop updating
  double tau_overlap = 0.8;  // IoA at or above which a prime/aux pair forms
  double tau_min = 0.8;      // minimum prime distance for a reassignment
  double tau_dif = 0.4;      // minimum margin of prime distance over aux distance

  /// Throws on non-finite or out-of-range values. Returns a warning when tau_overlap is
  /// below tau_update: pairs could then form between tracklets whose features still update.
  std::optional<std::string> validate() const {
    for (double v : {tau_update, tau_overlap, tau_min, tau_dif}) {
      if (!std::isfinite(v)) throw InputError("correction thresholds must be finite");
    }
    if (tau_update < 0.0 || tau_update > 1.0 || tau_overlap < 0.0 || tau_overlap > 1.0) {
      throw InputError("tau_update and tau_overlap must lie in [0, 1]");
    }
    if (tau_min < 0.0 || tau_dif < 0.0) throw InputError("tau_min and tau_dif must be >= 0");
    if (tau_overlap < tau_update) {
      return "tau_overlap (" + std::to_string(tau_overlap) + ") is below tau_update (" +
             std::to_string(tau_update) + ")";
    }
    return std::nullopt;
  }
};

/// The prime is the reference box of the IoA: the tracklet mostly covered by the aux.
struct OverlapPair {
  TrackId prime = 0;
  TrackId aux = 0;
  double ioa_value = 0.0;
  bool operator==(const OverlapPair&) const = default;
};

struct OverlapPairSet {
  std::map<TrackId, OverlapPair> pairs;  // keyed by prime
  int formed_at_frame = -1;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
};

/// One pair per prime: among all others with IoA >= tau_overlap the largest IoA wins, the
/// earlier tracklet on ties.
inline OverlapPairSet detect_overlap_pairs(const IoAMatrix& ioa_m, std::span<const TrackId> ids,
                                           double tau_overlap, int frame = -1) {
  if (ioa_m.rows() != ioa_m.cols() || ioa_m.rows() != static_cast<Eigen::Index>(ids.size())) {
    throw std::logic_error("IoA matrix does not match the tracklet ordering");
  }
  OverlapPairSet out;
  out.formed_at_frame = frame;
  for (Eigen::Index i = 0; i < ioa_m.rows(); ++i) {
    std::optional<OverlapPair> best;
    for (Eigen::Index j = 0; j < ioa_m.cols(); ++j) {
      if (i == j || ioa_m(i, j) < tau_overlap) continue;
      if (!best || ioa_m(i, j) > best->ioa_value) {
        best = OverlapPair{ids[i], ids[j], ioa_m(i, j)};
      }
    }
    if (best) out.pairs.emplace(best->prime, *best);
  }
  return out;
}

struct Reassignment {
  std::size_t detection = 0;
  TrackId prime = 0;
  TrackId aux = 0;
  std::optional<std::size_t> displaced;  // detection previously held by aux
  double prime_distance = 0.0;
  double aux_distance = 0.0;
};

struct CorrectionResult {
  MatchSet matches;
  std::vector<Reassignment> reassignments;
};

/// Reassignment rule for one candidate, in distance terms (larger = less alike).
inline bool should_reassign(double prime_distance, double aux_distance,
                            const CorrectionThresholds& th) {
  return prime_distance >= th.tau_min && prime_distance - aux_distance >= th.tau_dif;
}

/// Re-examines matches whose tracklet is the prime of an overlap pair from the previous
/// frame. When the matched detection is far from the prime's stored feature and closer to
/// the aux's by at least tau_dif, the detection moves to the aux, the prime becomes
/// unmatched, and whatever the aux held becomes an unmatched detection.
///
/// Only matches whose detection is listed in `eligible` are candidates (the detections of
/// the current stage). Primes are visited in ascending id order against the live match set.
inline CorrectionResult correct_matches(MatchSet ms, const OverlapPairSet& pairs,
                                        const AppearanceStore& store,
                                        std::span<const FeatureVector> detection_features,
                                        const CorrectionThresholds& th, Similarity similarity,
                                        std::span<const std::size_t> eligible) {
  CorrectionResult out;
  for (const auto& [prime, pair] : pairs.pairs) {
    const auto det = ms.detection_of(prime);
    if (!det) continue;
    if (std::find(eligible.begin(), eligible.end(), *det) == eligible.end()) continue;
    if (!ms.knows_tracklet(pair.aux)) continue;

    const auto& prime_entry = store.at(prime);
    const auto* aux_entry = store.find(pair.aux);
    if (aux_entry == nullptr) continue;

    const FeatureVector& f = detection_features[*det];
    const double s_pri = distance(similarity, f, prime_entry.feature);
    const double s_aux = distance(similarity, f, aux_entry->feature);
    if (!should_reassign(s_pri, s_aux, th)) continue;

    Reassignment r{*det, prime, pair.aux, ms.detection_of(pair.aux), s_pri, s_aux};
    std::erase_if(ms.matches, [&](const Match& m) {
      return m.tracklet == prime || m.tracklet == pair.aux;
    });
    std::erase(ms.unmatched_tracklets, pair.aux);
    ms.matches.push_back(Match{*det, pair.aux});
    ms.unmatched_tracklets.push_back(prime);
    if (r.displaced) ms.unmatched_detections.push_back(*r.displaced);
    ms.normalize();
    out.reassignments.push_back(r);
  }
  out.matches = std::move(ms);
  return out;
}

struct FrameBookkeeping {
  IoAMatrix ioa;
  OverlapPairSet pairs;
  AppearanceStore store;
};

/// Box a tracklet contributes to the overlap status: the matched detection's box when it
/// was matched this frame, otherwise its motion prediction.
inline BoundingBox overlap_box(const Tracklet& t) {
  return t.time_since_update == 0 ? t.last_box : state_box(t.motion);
}

/// End-of-frame pass: IoA over the final tracklet set, pair detection, overlap-gated
/// feature refresh, then stored features for tracklets created this frame. Entries of
/// tracklets no longer alive are dropped.
inline FrameBookkeeping end_of_frame_bookkeeping(std::span<const Tracklet> tracklets,
                                                 AppearanceStore store,
                                                 std::span<const TrackId> created,
                                                 const CorrectionThresholds& th, int frame) {
  std::vector<BoundingBox> boxes;
  std::vector<TrackId> ids;
  std::vector<FeatureObservation> obs;
  boxes.reserve(tracklets.size());
  for (const auto& t : tracklets) {
    boxes.push_back(overlap_box(t));
    ids.push_back(t.id);
    FeatureObservation o{t.id, std::nullopt};
    if (t.time_since_update == 0) o.current = t.current_feature;
    obs.push_back(std::move(o));
  }

  FrameBookkeeping out;
  out.ioa = pairwise_ioa_matrix(boxes);
  out.pairs = detect_overlap_pairs(out.ioa, ids, th.tau_overlap, frame);

  std::vector<TrackId> stale;
  for (const auto& [id, entry] : store.entries()) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) stale.push_back(id);
  }
  for (TrackId id : stale) store.erase(id);

  store = filter_and_update(std::move(store), obs, out.ioa, th.tau_update, frame);
  for (TrackId id : created) {
    for (const auto& t : tracklets) {
      if (t.id == id) store = register_new(std::move(store), id, t.current_feature, frame);
    }
  }
  out.store = std::move(store);
  return out;
}

}  // namespace fctrack
