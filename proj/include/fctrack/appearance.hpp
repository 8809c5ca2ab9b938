#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fctrack/error.hpp"
#include "fctrack/geometry.hpp"

namespace fctrack {

using TrackId = std::int64_t;

/// Appearance embedding. All components finite, norm non-zero.
class FeatureVector {
 public:
  FeatureVector() = default;

  explicit FeatureVector(std::vector<float> values) : values_(std::move(values)) {
    if (values_.empty()) throw InputError("feature vector is empty");
    double sq = 0.0;
    for (float v : values_) {
      if (!std::isfinite(v)) throw InputError("feature vector has a non-finite component");
      sq += static_cast<double>(v) * v;
    }
    if (sq == 0.0) throw InputError("feature vector has zero norm");
    norm_ = std::sqrt(sq);
  }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double norm() const { return norm_; }
  std::span<const float> values() const { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const FeatureVector& o) const { return values_ == o.values_; }

 private:
  std::vector<float> values_;
  double norm_ = 0.0;
};

enum class Similarity { cosine, euclidean };

inline std::string_view to_string(Similarity s) {
  return s == Similarity::cosine ? "cosine" : "euclidean";
}

inline Similarity parse_similarity(std::string_view s) {
  if (s == "cosine") return Similarity::cosine;
  if (s == "euclidean") return Similarity::euclidean;
  throw InputError("unknown similarity '" + std::string(s) + "' (expected cosine or euclidean)");
}

namespace detail {

inline void require_same_dim(const FeatureVector& u, const FeatureVector& v) {
  if (u.size() != v.size()) {
    throw InputError("feature dimension mismatch: " + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()));
  }
}

}  // namespace detail

/// 1 - cos(u, v), in [0, 2].
inline double cosine_distance(const FeatureVector& u, const FeatureVector& v) {
  detail::require_same_dim(u, v);
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += static_cast<double>(u[i]) * v[i];
  return std::clamp(1.0 - dot / (u.norm() * v.norm()), 0.0, 2.0);
}

inline double euclidean_distance(const FeatureVector& u, const FeatureVector& v) {
  detail::require_same_dim(u, v);
  double sq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = static_cast<double>(u[i]) - v[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

inline double distance(Similarity s, const FeatureVector& u, const FeatureVector& v) {
  return s == Similarity::cosine ? cosine_distance(u, v) : euclidean_distance(u, v);
}

/// Upper end of the distance scale used to normalise appearance cost. Exact for cosine;
/// for Euclidean it is the bound between unit-norm embeddings.
inline double max_distance(Similarity) { return 2.0; }

/// Per-tracklet feature memory read by the correction layer. Separate from the running
/// appearance model the associator keeps.
class AppearanceStore {
 public:
  struct Entry {
    FeatureVector feature;
    int stored_at_frame = 0;
  };

  bool contains(TrackId id) const { return entries_.count(id) != 0; }
  std::size_t size() const { return entries_.size(); }

  const Entry* find(TrackId id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const Entry& at(TrackId id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) {
      throw std::logic_error("appearance store has no entry for tracklet " + std::to_string(id));
    }
    return it->second;
  }

  void set(TrackId id, FeatureVector feature, int frame) {
    entries_[id] = Entry{std::move(feature), frame};
  }

  /// Returns true when an entry was created.
  bool insert_if_absent(TrackId id, const FeatureVector& feature, int frame) {
    return entries_.try_emplace(id, Entry{feature, frame}).second;
  }

  void erase(TrackId id) { entries_.erase(id); }

  const std::map<TrackId, Entry>& entries() const { return entries_; }

  bool operator==(const AppearanceStore& o) const {
    if (entries_.size() != o.entries_.size()) return false;
    auto a = entries_.begin();
    auto b = o.entries_.begin();
    for (; a != entries_.end(); ++a, ++b) {
      if (a->first != b->first || !(a->second.feature == b->second.feature) ||
          a->second.stored_at_frame != b->second.stored_at_frame) {
        return false;
      }
    }
    return true;
  }

 private:
  std::map<TrackId, Entry> entries_;
};

/// A tracklet as seen by the feature filter: its id and, when it was matched this frame,
/// the feature of the detection it was matched to.
struct FeatureObservation {
  TrackId id = 0;
  std::optional<FeatureVector> current;
};

/// Largest off-diagonal IoA in row i or column i; 0 when there is none.
inline double max_involved_ioa(const IoAMatrix& ioa, Eigen::Index i) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < ioa.cols(); ++j) {
    if (j == i) continue;
    m = std::max({m, ioa(i, j), ioa(j, i)});
  }
  return m;
}

/// Overlap-gated store update. A tracklet whose boxes touch any other tracklet with
/// IoA >= tau_update in either direction keeps its stored feature untouched; every other
/// tracklet with a current observation has its entry replaced. Tracklets without an entry
/// get one whenever they carry an observation.
inline AppearanceStore filter_and_update(AppearanceStore store,
                                         std::span<const FeatureObservation> tracklets,
                                         const IoAMatrix& ioa, double tau_update, int frame) {
  if (ioa.rows() != ioa.cols() || ioa.rows() != static_cast<Eigen::Index>(tracklets.size())) {
    throw std::logic_error("IoA matrix size " + std::to_string(ioa.rows()) + "x" +
                           std::to_string(ioa.cols()) + " does not match " +
                           std::to_string(tracklets.size()) + " tracklets");
  }
  for (std::size_t i = 0; i < tracklets.size(); ++i) {
    const auto& t = tracklets[i];
    if (!t.current) continue;
    if (!store.contains(t.id)) {
      store.set(t.id, *t.current, frame);
      continue;
    }
    if (max_involved_ioa(ioa, static_cast<Eigen::Index>(i)) < tau_update) {
      store.set(t.id, *t.current, frame);
    }
  }
  return store;
}

inline AppearanceStore register_new(AppearanceStore store, TrackId id,
                                    const FeatureVector& feature, int frame) {
  store.insert_if_absent(id, feature, frame);
  return store;
}

}  // namespace fctrack
