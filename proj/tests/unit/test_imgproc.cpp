#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "rap/imgproc.hpp"

using namespace rap;

namespace {

ScalarGrid brute_sq_edt(const BinaryMask& sites) {
  ScalarGrid out(sites.height(), sites.width(), std::numeric_limits<double>::infinity());
  for (int y = 0; y < sites.height(); ++y)
    for (int x = 0; x < sites.width(); ++x)
      for (int sy = 0; sy < sites.height(); ++sy)
        for (int sx = 0; sx < sites.width(); ++sx)
          if (sites(sx, sy)) {
            const double d = double(x - sx) * (x - sx) + double(y - sy) * (y - sy);
            out(x, y) = std::min(out(x, y), d);
          }
  return out;
}

}  // namespace

TEST(Imgproc, SquaredEdtMatchesBruteForce) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 5 + trial % 13;
    const int w = 3 + (trial * 7) % 17;
    BinaryMask sites(h, w);
    std::bernoulli_distribution b(0.05 + 0.02 * trial);
    for (auto& v : sites.data()) v = b(rng);
    sites(0, 0) = 1;
    const ScalarGrid want = brute_sq_edt(sites);
    EXPECT_EQ(squared_distance_transform(sites, Exec::Serial), want);
    EXPECT_EQ(squared_distance_transform(sites, Exec::Parallel), want);
  }
}

TEST(Imgproc, EdtWithoutSitesIsInfinite) {
  const ScalarGrid d = distance_transform(BinaryMask(4, 4));
  for (double v : d.data()) EXPECT_TRUE(std::isinf(v));
}

TEST(Imgproc, EdtSinglePoint) {
  BinaryMask s(7, 9);
  s(3, 3) = 1;
  const ScalarGrid d = distance_transform(s);
  EXPECT_DOUBLE_EQ(d(3, 3), 0.0);
  EXPECT_DOUBLE_EQ(d(7, 6), 5.0);
  EXPECT_DOUBLE_EQ(d(0, 0), std::sqrt(18.0));
}

TEST(Imgproc, ResizeBilinearIdentityAndConstant) {
  std::mt19937 rng(2);
  const Image img = rap::testing::random_image(rng, 9, 11);
  EXPECT_EQ(resize_bilinear(img, 9, 11), img);
  const Image flat = resize_bilinear(Image(4, 4, 0.3f), 13, 7);
  for (float v : flat.data()) EXPECT_NEAR(v, 0.3f, 1e-6);
}

TEST(Imgproc, ResizeNearestDoubling) {
  BinaryMask m(2, 2);
  m(1, 0) = 1;
  const BinaryMask up = resize_nearest(m, 4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_EQ(up(x, y), (x >= 2 && y < 2) ? 1 : 0) << x << "," << y;
}

TEST(Imgproc, UpsampleCellsKeepsCentres) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarGrid cells(4, 4);
  for (double& v : cells.data()) v = u(rng);
  // An odd factor puts pixel centres exactly on cell centres.
  const ScalarGrid up3 = upsample_cells(cells, 12, 12);
  for (int gy = 0; gy < 4; ++gy)
    for (int gx = 0; gx < 4; ++gx) EXPECT_NEAR(up3(3 * gx + 1, 3 * gy + 1), cells(gx, gy), 1e-12);
}

TEST(Imgproc, BlockMajorityIsStrict) {
  BinaryMask m(4, 4);
  m(0, 0) = m(1, 0) = 1;  // cell (0,0): half
  m(2, 0) = m(3, 0) = m(2, 1) = 1;  // cell (1,0): 3/4
  const BinaryMask g = block_majority(m, 2, 2);
  EXPECT_EQ(g(0, 0), 0);
  EXPECT_EQ(g(1, 0), 1);
  EXPECT_EQ(g(0, 1), 0);
  EXPECT_EQ(g(1, 1), 0);
}

TEST(Imgproc, ComponentsAndLargest) {
  BinaryMask m = rap::testing::rect(10, 10, 0, 0, 1, 1);
  for (int y = 5; y <= 8; ++y)
    for (int x = 5; x <= 8; ++x) m(x, y) = 1;
  m(3, 3) = 1;  // diagonal neighbour of nothing
  m(2, 2) = 1;  // 8-connects to the first square
  const Components c = label_components(m);
  EXPECT_EQ(c.sizes.size(), 2u);
  const BinaryMask big = largest_component(m);
  EXPECT_EQ(big.count(), 16u);
  EXPECT_EQ(big(5, 5), 1);
  EXPECT_EQ(big(0, 0), 0);
}

TEST(Imgproc, LargestComponentTieGoesToFirst) {
  BinaryMask m(5, 5);
  m(4, 4) = 1;
  m(0, 0) = 1;
  const BinaryMask big = largest_component(m);
  EXPECT_EQ(big(0, 0), 1);
  EXPECT_EQ(big(4, 4), 0);
}

TEST(Imgproc, FillHoles) {
  BinaryMask ring = rap::testing::rect(9, 9, 1, 1, 7, 7);
  for (int y = 3; y <= 5; ++y)
    for (int x = 3; x <= 5; ++x) ring(x, y) = 0;
  const BinaryMask filled = fill_holes(ring);
  EXPECT_EQ(filled, rap::testing::rect(9, 9, 1, 1, 7, 7));
  // A notch open to the border is not a hole.
  BinaryMask cup = rap::testing::rect(6, 6, 0, 0, 5, 5);
  for (int y = 0; y <= 3; ++y) cup(2, y) = 0;
  EXPECT_EQ(fill_holes(cup), cup);
}

TEST(Imgproc, CentroidAndBoundingBox) {
  const BinaryMask m = rap::testing::rect(10, 12, 2, 3, 5, 7);
  const auto c = centroid(m);
  ASSERT_TRUE(c.has_value());
  EXPECT_DOUBLE_EQ(c->x, 3.5);
  EXPECT_DOUBLE_EQ(c->y, 5.0);
  EXPECT_EQ(bounding_box(m), (Box{2, 3, 5, 7}));
  EXPECT_FALSE(centroid(BinaryMask(3, 3)).has_value());
  EXPECT_FALSE(bounding_box(BinaryMask(3, 3)).valid());
}
