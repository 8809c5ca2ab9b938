#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fctrack/appearance.hpp"
#include "fctrack/geometry.hpp"

using namespace fctrack;

namespace {

FeatureVector fv(std::vector<float> v) { return FeatureVector(std::move(v)); }

IoAMatrix matrix(std::initializer_list<std::initializer_list<double>> rows) {
  IoAMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST(CosineDistance, Examples) {
  EXPECT_NEAR(cosine_distance(fv({0.3f, 0.4f}), fv({0.3f, 0.4f})), 0.0, 1e-12);
  EXPECT_NEAR(cosine_distance(fv({1, 0}), fv({0, 1})), 1.0, 1e-12);
  EXPECT_NEAR(cosine_distance(fv({1, 2, 3}), fv({-1, -2, -3})), 2.0, 1e-12);
}

TEST(CosineDistance, ScaleInvariant) {
  EXPECT_NEAR(cosine_distance(fv({1, 2, 3}), fv({4, -1, 2})),
              cosine_distance(fv({10, 20, 30}), fv({0.4f, -0.1f, 0.2f})), 1e-6);
}

TEST(EuclideanDistance, Examples) {
  EXPECT_DOUBLE_EQ(euclidean_distance(fv({1, 2}), fv({1, 2})), 0.0);
  EXPECT_NEAR(euclidean_distance(fv({1, 0}), fv({0, 1})), std::sqrt(2.0), 1e-12);
}

TEST(EuclideanDistance, ThreeFourFive) {
  // Zero-norm embeddings are rejected, so the (3,4) offset is taken between two points.
  EXPECT_NEAR(euclidean_distance(fv({4, 5}), fv({1, 1})), 5.0, 1e-12);
  EXPECT_THROW(fv({0, 0}), InputError);
}

TEST(Distance, DimensionMismatchIsInputError) {
  EXPECT_THROW(cosine_distance(fv({1, 0}), fv({1, 0, 0})), InputError);
  EXPECT_THROW(euclidean_distance(fv({1}), fv({1, 2})), InputError);
}

TEST(Distance, DispatchesOnSimilarity) {
  const auto u = fv({1, 0}), v = fv({0, 1});
  EXPECT_EQ(distance(Similarity::cosine, u, v), cosine_distance(u, v));
  EXPECT_EQ(distance(Similarity::euclidean, u, v), euclidean_distance(u, v));
  EXPECT_EQ(parse_similarity("cosine"), Similarity::cosine);
  EXPECT_EQ(parse_similarity("euclidean"), Similarity::euclidean);
  EXPECT_THROW(parse_similarity("manhattan"), InputError);
}

TEST(FilterAndUpdate, SingleTrackletAlwaysUpdates) {
  AppearanceStore s;
  s.set(1, fv({1, 0}), 1);
  const std::vector<FeatureObservation> obs{{1, fv({0, 1})}};
  const auto out = filter_and_update(s, obs, matrix({{1.0}}), 0.3, 2);
  EXPECT_EQ(out.at(1).feature, fv({0, 1}));
  EXPECT_EQ(out.at(1).stored_at_frame, 2);
}

TEST(FilterAndUpdate, NestedPairRetainsBoth) {
  AppearanceStore s;
  s.set(1, fv({1, 0}), 1);
  s.set(2, fv({0, 1}), 1);
  const std::vector<BoundingBox> boxes{BoundingBox(0, 0, 4, 4), BoundingBox(0, 0, 8, 8)};
  const std::vector<FeatureObservation> obs{{1, fv({1, 1})}, {2, fv({1, -1})}};
  const auto out = filter_and_update(s, obs, pairwise_ioa_matrix(boxes), 0.3, 2);
  EXPECT_EQ(out, s);
}

TEST(FilterAndUpdate, OnlyTheOverlappingPairRetains) {
  // Pair (1,2) shares IoA 0.5 one way; tracklet 3 touches nobody.
  AppearanceStore s;
  s.set(1, fv({1, 0, 0}), 1);
  s.set(2, fv({0, 1, 0}), 1);
  s.set(3, fv({0, 0, 1}), 1);
  const auto m = matrix({{1.0, 0.5, 0.0}, {0.1, 1.0, 0.0}, {0.0, 0.0, 1.0}});
  const std::vector<FeatureObservation> obs{{1, fv({1, 1, 0})}, {2, fv({1, 1, 1})}, {3, fv({0, 1, 1})}};
  const auto out = filter_and_update(s, obs, m, 0.3, 5);
  EXPECT_EQ(out.at(1).feature, fv({1, 0, 0}));
  EXPECT_EQ(out.at(2).feature, fv({0, 1, 0}));
  EXPECT_EQ(out.at(3).feature, fv({0, 1, 1}));
  EXPECT_EQ(out.at(3).stored_at_frame, 5);
  EXPECT_EQ(out.at(1).stored_at_frame, 1);
}

TEST(FilterAndUpdate, ThresholdIsInclusive) {
  AppearanceStore s;
  s.set(1, fv({1, 0}), 1);
  s.set(2, fv({0, 1}), 1);
  const auto m = matrix({{1.0, 0.3}, {0.0, 1.0}});
  const std::vector<FeatureObservation> obs{{1, fv({1, 1})}, {2, fv({1, -1})}};
  EXPECT_EQ(filter_and_update(s, obs, m, 0.3, 2), s);
  const auto below = filter_and_update(s, obs, m, 0.31, 2);
  EXPECT_EQ(below.at(1).feature, fv({1, 1}));
}

TEST(FilterAndUpdate, UnmatchedTrackletKeepsEntry) {
  AppearanceStore s;
  s.set(1, fv({1, 0}), 1);
  const std::vector<FeatureObservation> obs{{1, std::nullopt}};
  EXPECT_EQ(filter_and_update(s, obs, matrix({{1.0}}), 0.3, 2), s);
}

TEST(FilterAndUpdate, SizeMismatchIsInternalError) {
  AppearanceStore s;
  const std::vector<FeatureObservation> obs{{1, fv({1})}};
  EXPECT_THROW(filter_and_update(s, obs, matrix({{1.0, 0.0}, {0.0, 1.0}}), 0.3, 1), std::logic_error);
}

TEST(FilterAndUpdate, NeverTouchesOverlappedEntries) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    AppearanceStore s;
    std::vector<FeatureObservation> obs;
    IoAMatrix m = IoAMatrix::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      s.set(i + 1, fv({1.0f, static_cast<float>(i)}), 1);
      obs.push_back({i + 1, fv({static_cast<float>(i), 1.0f})});
      for (int j = 0; j < n; ++j) {
        if (i != j) m(i, j) = u(rng) < 0.7 ? 0.0 : u(rng);
      }
    }
    const auto out = filter_and_update(s, obs, m, 0.3, 2);
    for (int i = 0; i < n; ++i) {
      double worst = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) worst = std::max({worst, m(i, j), m(j, i)});
      }
      const bool updated = out.at(i + 1).stored_at_frame == 2;
      EXPECT_EQ(updated, worst < 0.3);
    }
  }
}

TEST(RegisterNew, CreatesThenIgnores) {
  AppearanceStore s;
  s = register_new(s, 7, fv({1, 0}), 3);
  ASSERT_TRUE(s.contains(7));
  EXPECT_EQ(s.at(7).stored_at_frame, 3);
  const auto again = register_new(s, 7, fv({0, 1}), 4);
  EXPECT_EQ(again, s);
}

TEST(RegisterNew, BatchGrowsByCount) {
  AppearanceStore s;
  s.set(1, fv({1}), 1);
  for (TrackId id = 10; id < 15; ++id) s = register_new(s, id, fv({1}), 2);
  EXPECT_EQ(s.size(), 6u);
}

TEST(AppearanceStoreTest, AtThrowsForMissingId) {
  AppearanceStore s;
  EXPECT_THROW(s.at(3), std::logic_error);
  EXPECT_EQ(s.find(3), nullptr);
}
