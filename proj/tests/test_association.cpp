#include <gtest/gtest.h>

#include <vector>

#include "fctrack/association.hpp"

using namespace fctrack;

namespace {

FeatureVector fv(std::vector<float> v) { return FeatureVector(std::move(v)); }

Tracklet make_tracklet(TrackId id, const BoundingBox& box, const FeatureVector& f,
                       TrackStatus status = TrackStatus::confirmed) {
  Tracklet t;
  t.id = id;
  t.motion = kf_initiate(box);
  t.last_box = box;
  t.status = status;
  t.hits = 1;
  t.current_feature = f;
  t.appearance = f;
  return t;
}

Detection make_det(const BoundingBox& box, double conf, const FeatureVector& f) {
  Detection d;
  d.frame = 1;
  d.box = box;
  d.confidence = conf;
  d.feature = f;
  return d;
}

CostMatrix cost_of(const std::vector<Tracklet>& ts, const std::vector<Detection>& ds, double w) {
  std::vector<const Tracklet*> tp;
  for (const auto& t : ts) tp.push_back(&t);
  std::vector<const Detection*> dp;
  for (const auto& d : ds) dp.push_back(&d);
  return build_cost_matrix(tp, dp, w, Similarity::cosine);
}

}  // namespace

TEST(BuildCostMatrix, Examples) {
  const BoundingBox box(10, 10, 20, 40);
  const std::vector<Tracklet> ts{make_tracklet(1, box, fv({1, 0}))};
  // w = 0, identical boxes: cost 0 whatever the features.
  EXPECT_NEAR(cost_of(ts, {make_det(box, 0.9, fv({0, 1}))}, 0.0)(0, 0), 0.0, 1e-12);
  // w = 1, identical features: cost 0 whatever the IoU, as long as the boxes overlap.
  EXPECT_NEAR(cost_of(ts, {make_det(BoundingBox(20, 10, 20, 40), 0.9, fv({1, 0}))}, 1.0)(0, 0), 0.0, 1e-12);
  // Disjoint boxes are gated even with identical features.
  EXPECT_EQ(cost_of(ts, {make_det(BoundingBox(500, 500, 20, 40), 0.9, fv({1, 0}))}, 0.5)(0, 0), kGated);
}

TEST(BuildCostMatrix, MixesIouAndAppearance) {
  const BoundingBox box(0, 0, 10, 10);
  const std::vector<Tracklet> ts{make_tracklet(1, box, fv({1, 0}))};
  // IoU 1/3, cosine distance 1 (orthogonal) -> 0.75 * 2/3 + 0.25 * 1/2.
  const double c = cost_of(ts, {make_det(BoundingBox(5, 0, 10, 10), 0.9, fv({0, 1}))}, 0.25)(0, 0);
  EXPECT_NEAR(c, 0.75 * (2.0 / 3.0) + 0.25 * 0.5, 1e-12);
}

TEST(BuildCostMatrix, EmptyAxes) {
  const auto c = cost_of({}, {make_det(BoundingBox(0, 0, 1, 1), 0.9, fv({1}))}, 0.5);
  EXPECT_EQ(c.rows(), 0);
  EXPECT_EQ(c.cols(), 1);
}

TEST(TwoStageAssociate, NoTrackletsLeavesEverythingUnmatched) {
  const std::vector<Detection> ds{make_det(BoundingBox(0, 0, 10, 10), 0.9, fv({1})),
                                  make_det(BoundingBox(50, 0, 10, 10), 0.2, fv({1}))};
  const auto ms = two_stage_associate({}, ds, AssociationConfig{});
  EXPECT_TRUE(ms.matches.empty());
  EXPECT_EQ(ms.unmatched_detections, (std::vector<std::size_t>{0, 1}));
}

TEST(TwoStageAssociate, AllHighConfidenceMakesStageTwoANoOp) {
  const std::vector<Tracklet> ts{make_tracklet(1, BoundingBox(0, 0, 10, 20), fv({1, 0})),
                                 make_tracklet(2, BoundingBox(100, 0, 10, 20), fv({0, 1}))};
  const std::vector<Detection> ds{make_det(BoundingBox(1, 0, 10, 20), 0.9, fv({1, 0})),
                                  make_det(BoundingBox(300, 0, 10, 20), 0.8, fv({0, 1}))};
  MatchSet after1;
  std::size_t stage2_dets = 99;
  const auto ms = two_stage_associate(ts, ds, AssociationConfig{},
                                      [&](int stage, MatchSet& m, std::span<const std::size_t> d) {
                                        if (stage == 1) after1 = m;
                                        else stage2_dets = d.size();
                                      });
  EXPECT_EQ(stage2_dets, 0u);
  EXPECT_EQ(ms, after1);
  EXPECT_EQ(ms.matches, (std::vector<Match>{{0, 1}}));
  EXPECT_EQ(ms.unmatched_tracklets, std::vector<TrackId>{2});
  EXPECT_EQ(ms.unmatched_detections, std::vector<std::size_t>{1});
}

TEST(TwoStageAssociate, StraddlingDetectionsMatchOncePerStage) {
  const std::vector<Tracklet> ts{make_tracklet(1, BoundingBox(0, 0, 20, 40), fv({1, 0})),
                                 make_tracklet(2, BoundingBox(200, 0, 20, 40), fv({0, 1}))};
  const std::vector<Detection> ds{make_det(BoundingBox(2, 0, 20, 40), 0.9, fv({1, 0})),
                                  make_det(BoundingBox(203, 1, 20, 40), 0.3, fv({0, 1}))};
  std::vector<std::vector<Match>> per_stage;
  const auto ms = two_stage_associate(ts, ds, AssociationConfig{},
                                      [&](int, MatchSet& m, std::span<const std::size_t>) {
                                        per_stage.push_back(m.matches);
                                      });
  ASSERT_EQ(per_stage.size(), 2u);
  EXPECT_EQ(per_stage[0], (std::vector<Match>{{0, 1}}));
  EXPECT_EQ(ms.matches, (std::vector<Match>{{0, 1}, {1, 2}}));
  EXPECT_TRUE(ms.unmatched_detections.empty());
  EXPECT_TRUE(ms.unmatched_tracklets.empty());

  // Oracle: each stage on its own, as a single Hungarian problem.
  const auto c1 = cost_of(ts, {ds[0]}, 0.25);
  const auto a1 = hungarian_assign(c1, 0.8);
  ASSERT_EQ(a1.pairs.size(), 1u);
  EXPECT_EQ(a1.pairs[0].first, 0);
  const auto c2 = cost_of({ts[1]}, {ds[1]}, 0.0);
  EXPECT_EQ(hungarian_assign(c2, 0.8).pairs.size(), 1u);
}

TEST(TwoStageAssociate, LowConfidenceCannotStealFromStageOne) {
  // Both detections sit on tracklet 1; the confident one wins in stage 1 and the weak one
  // finds no tracklet left in stage 2.
  const std::vector<Tracklet> ts{make_tracklet(1, BoundingBox(0, 0, 20, 40), fv({1, 0}))};
  const std::vector<Detection> ds{make_det(BoundingBox(0, 0, 20, 40), 0.3, fv({1, 0})),
                                  make_det(BoundingBox(3, 0, 20, 40), 0.9, fv({1, 0}))};
  const auto ms = two_stage_associate(ts, ds, AssociationConfig{});
  EXPECT_EQ(ms.matches, (std::vector<Match>{{1, 1}}));
  EXPECT_EQ(ms.unmatched_detections, std::vector<std::size_t>{0});
}

TEST(TwoStageAssociate, ResultIsAPartition) {
  std::vector<Tracklet> ts;
  std::vector<Detection> ds;
  std::vector<TrackId> ids;
  for (int i = 0; i < 6; ++i) {
    ts.push_back(make_tracklet(i + 1, BoundingBox(i * 15.0, 0, 20, 40), fv({1, static_cast<float>(i)})));
    ids.push_back(i + 1);
  }
  for (int j = 0; j < 7; ++j) {
    ds.push_back(make_det(BoundingBox(j * 13.0, 2, 20, 40), j % 2 ? 0.9 : 0.4, fv({1, static_cast<float>(j)})));
  }
  const auto ms = two_stage_associate(ts, ds, AssociationConfig{});
  EXPECT_TRUE(is_valid_partition(ms, ds.size(), ids));
}

TEST(LifecycleStep, RemovedAfterMaxLostPlusOneMisses) {
  LifecycleParams p;
  p.max_lost_frames = 3;
  std::vector<Tracklet> ts{make_tracklet(1, BoundingBox(0, 0, 10, 20), fv({1}))};
  TrackId next = 2;
  for (int miss = 1; miss <= 4; ++miss) {
    MatchSet ms;
    ms.unmatched_tracklets = {1};
    auto r = lifecycle_step(ts, {}, ms, p, next);
    if (miss <= 3) {
      ASSERT_EQ(r.tracklets.size(), 1u) << "miss " << miss;
      EXPECT_EQ(r.tracklets[0].status, TrackStatus::lost);
      EXPECT_EQ(r.tracklets[0].time_since_update, miss);
    } else {
      EXPECT_TRUE(r.tracklets.empty());
      EXPECT_EQ(r.removed, std::vector<TrackId>{1});
    }
    ts = r.tracklets;
  }
}

TEST(LifecycleStep, ConfidentDetectionStartsFreshTracklet) {
  TrackId next = 5;
  const std::vector<Detection> ds{make_det(BoundingBox(0, 0, 10, 20), 0.9, fv({1})),
                                  make_det(BoundingBox(100, 0, 10, 20), 0.9, fv({1}))};
  MatchSet ms;
  ms.unmatched_detections = {0, 1};
  const auto r = lifecycle_step({}, ds, ms, LifecycleParams{}, next);
  EXPECT_EQ(r.created, (std::vector<TrackId>{5, 6}));
  EXPECT_EQ(next, 7u);
  ASSERT_EQ(r.tracklets.size(), 2u);
  EXPECT_EQ(r.tracklets[0].status, TrackStatus::tentative);
  EXPECT_EQ(r.tracklets[0].hits, 1);
}

TEST(LifecycleStep, WeakDetectionStartsNothing) {
  TrackId next = 1;
  const std::vector<Detection> ds{make_det(BoundingBox(0, 0, 10, 20), 0.5, fv({1}))};
  MatchSet ms;
  ms.unmatched_detections = {0};
  EXPECT_TRUE(lifecycle_step({}, ds, ms, LifecycleParams{}, next).created.empty());
}

TEST(LifecycleStep, DetectionOnALiveTrackletStartsNothing) {
  TrackId next = 2;
  const std::vector<Tracklet> ts{make_tracklet(1, BoundingBox(0, 0, 20, 40), fv({1}))};
  const std::vector<Detection> ds{make_det(BoundingBox(1, 0, 20, 40), 0.9, fv({1})),
                                  make_det(BoundingBox(2, 1, 20, 40), 0.95, fv({1}))};
  MatchSet ms;
  ms.matches = {{0, 1}};
  ms.unmatched_detections = {1};
  const auto r = lifecycle_step(ts, ds, ms, LifecycleParams{}, next);
  EXPECT_TRUE(r.created.empty());
  LifecycleParams off;
  off.init_iou_suppress = 1.5;
  EXPECT_EQ(lifecycle_step(ts, ds, ms, off, next).created.size(), 1u);
}

TEST(LifecycleStep, TentativeConfirmsAfterConfirmHits) {
  LifecycleParams p;
  p.confirm_hits = 3;
  std::vector<Tracklet> ts{make_tracklet(1, BoundingBox(0, 0, 10, 20), fv({1}), TrackStatus::tentative)};
  const std::vector<Detection> ds{make_det(BoundingBox(0, 0, 10, 20), 0.9, fv({1}))};
  TrackId next = 2;
  MatchSet ms;
  ms.matches = {{0, 1}};
  ts = lifecycle_step(ts, ds, ms, p, next).tracklets;
  EXPECT_EQ(ts[0].hits, 2);
  EXPECT_EQ(ts[0].status, TrackStatus::tentative);
  ts = lifecycle_step(ts, ds, ms, p, next).tracklets;
  EXPECT_EQ(ts[0].hits, 3);
  EXPECT_EQ(ts[0].status, TrackStatus::confirmed);
}

TEST(LifecycleStep, TentativeDroppedOnMiss) {
  std::vector<Tracklet> ts{make_tracklet(1, BoundingBox(0, 0, 10, 20), fv({1}), TrackStatus::tentative)};
  TrackId next = 2;
  MatchSet ms;
  ms.unmatched_tracklets = {1};
  const auto r = lifecycle_step(ts, {}, ms, LifecycleParams{}, next);
  EXPECT_TRUE(r.tracklets.empty());
  EXPECT_EQ(r.removed, std::vector<TrackId>{1});
}

TEST(LifecycleStep, LostTrackletRecoversOnMatch) {
  auto t = make_tracklet(1, BoundingBox(0, 0, 10, 20), fv({1}), TrackStatus::lost);
  t.time_since_update = 4;
  t.hits = 0;
  const std::vector<Detection> ds{make_det(BoundingBox(0, 0, 10, 20), 0.4, fv({1}))};
  TrackId next = 2;
  MatchSet ms;
  ms.matches = {{0, 1}};
  const auto r = lifecycle_step({t}, ds, ms, LifecycleParams{}, next);
  EXPECT_EQ(r.tracklets[0].status, TrackStatus::confirmed);
  EXPECT_EQ(r.tracklets[0].time_since_update, 0);
  EXPECT_DOUBLE_EQ(r.tracklets[0].last_confidence, 0.4);
}

TEST(BlendFeatures, MomentumZeroTakesFresh) {
  EXPECT_EQ(blend_features(fv({1, 0}), fv({0, 1}), 0.0), fv({0, 1}));
  const auto b = blend_features(fv({1, 0}), fv({0, 1}), 0.5);
  EXPECT_NEAR(b[0], b[1], 1e-6);
  EXPECT_NEAR(b.norm(), 1.0, 1e-6);
}
