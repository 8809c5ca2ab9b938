#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "fctrack/geometry.hpp"

using namespace fctrack;

TEST(Area, Examples) {
  EXPECT_DOUBLE_EQ(area(BoundingBox(0, 0, 10, 10)), 100.0);
  EXPECT_DOUBLE_EQ(area(BoundingBox(5, 5, 1, 1)), 1.0);
  EXPECT_DOUBLE_EQ(area(BoundingBox(0, 0, 3, 7)), 21.0);
}

TEST(BoundingBoxTest, RejectsDegenerateBoxes) {
  EXPECT_THROW(BoundingBox(0, 0, 0, 10), InputError);
  EXPECT_THROW(BoundingBox(0, 0, 10, -1), InputError);
  EXPECT_THROW(BoundingBox(std::nan(""), 0, 10, 10), InputError);
}

TEST(BoundingBoxTest, FromCenter) {
  const auto b = BoundingBox::from_center(50, 60, 20, 40);
  EXPECT_EQ(b, BoundingBox(40, 40, 20, 40));
  EXPECT_DOUBLE_EQ(b.center_x(), 50.0);
  EXPECT_DOUBLE_EQ(b.center_y(), 60.0);
}

TEST(IntersectionArea, Examples) {
  EXPECT_DOUBLE_EQ(intersection_area(BoundingBox(0, 0, 10, 10), BoundingBox(5, 0, 10, 10)), 50.0);
  EXPECT_DOUBLE_EQ(intersection_area(BoundingBox(0, 0, 10, 10), BoundingBox(20, 20, 5, 5)), 0.0);
  EXPECT_DOUBLE_EQ(intersection_area(BoundingBox(0, 0, 10, 10), BoundingBox(0, 0, 10, 10)), 100.0);
}

TEST(IntersectionArea, TouchingEdgesDoNotOverlap) {
  EXPECT_DOUBLE_EQ(intersection_area(BoundingBox(0, 0, 10, 10), BoundingBox(10, 0, 10, 10)), 0.0);
}

TEST(Iou, Examples) {
  const BoundingBox a(0, 0, 10, 10);
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, BoundingBox(20, 20, 5, 5)), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, BoundingBox(5, 0, 10, 10)), 1.0 / 3.0);
}

TEST(Ioa, Examples) {
  EXPECT_DOUBLE_EQ(ioa(BoundingBox(0, 0, 10, 10), BoundingBox(5, 0, 10, 10)), 0.5);
  EXPECT_DOUBLE_EQ(ioa(BoundingBox(0, 0, 4, 4), BoundingBox(0, 0, 8, 8)), 1.0);
  EXPECT_DOUBLE_EQ(ioa(BoundingBox(0, 0, 8, 8), BoundingBox(0, 0, 4, 4)), 0.25);
  const BoundingBox b(3.5, -2.25, 17.0, 0.75);
  EXPECT_DOUBLE_EQ(ioa(b, b), 1.0);
}

TEST(PairwiseIoaMatrix, Empty) {
  const auto m = pairwise_ioa_matrix(std::vector<BoundingBox>{});
  EXPECT_EQ(m.rows(), 0);
  EXPECT_EQ(m.cols(), 0);
}

TEST(PairwiseIoaMatrix, NestedPair) {
  const std::vector<BoundingBox> boxes{BoundingBox(0, 0, 4, 4), BoundingBox(0, 0, 8, 8)};
  const auto m = pairwise_ioa_matrix(boxes);
  ASSERT_EQ(m.rows(), 2);
  EXPECT_DOUBLE_EQ(m(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(m(1, 0), 0.25);
  EXPECT_DOUBLE_EQ(m(1, 1), 1.0);
}

TEST(PairwiseIoaMatrix, MatchesPerPairRecomputation) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0, 100), ext(1, 60);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BoundingBox> boxes;
    for (int k = 0; k < 5; ++k) boxes.emplace_back(pos(rng), pos(rng), ext(rng), ext(rng));
    const auto m = pairwise_ioa_matrix(boxes);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) EXPECT_EQ(m(i, j), ioa(boxes[i], boxes[j])) << i << "," << j;
    }
  }
}

TEST(Ioa, FuzzedProperties) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-200, 200), ext(0.1, 150), shift(-500, 500);
  for (int k = 0; k < 2000; ++k) {
    const BoundingBox a(pos(rng), pos(rng), ext(rng), ext(rng));
    const BoundingBox b(pos(rng), pos(rng), ext(rng), ext(rng));
    const double ab = ioa(a, b), ba = ioa(b, a);
    ASSERT_GE(ab, 0.0);
    ASSERT_LE(ab, 1.0);
    ASSERT_NEAR(ab * area(a), ba * area(b), 1e-9 * std::max(1.0, ab * area(a)));
    ASSERT_NEAR(iou(a, b), iou(b, a), 1e-15);
    ASSERT_LE(iou(a, b), std::min(ab, ba) + 1e-12);
    const double dx = shift(rng), dy = shift(rng);
    ASSERT_NEAR(ioa(a.translated(dx, dy), b.translated(dx, dy)), ab, 1e-9);
  }
}
