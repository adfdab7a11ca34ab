#include <random>

#include <gtest/gtest.h>

#include "binseg/mask.h"
#include "test_util.h"

namespace binseg {
namespace {

using testing::randomBitmap;
using testing::rectMask;

TEST(InstanceMask, ColumnMajorCountsStartWithZeros) {
  Bitmap b = Bitmap::Zero(2, 3);  // 2 rows, 3 columns
  b(0, 0) = 1;
  b(1, 1) = 1;
  const auto m = InstanceMask::fromBitmap(b);
  // Column-major sequence: 1 0 | 0 1 | 0 0
  EXPECT_EQ(m.counts(), (std::vector<std::uint32_t>{0, 1, 2, 1, 2}));
  EXPECT_EQ(m.area(), 2u);
  EXPECT_EQ(m.width(), 3);
  EXPECT_EQ(m.height(), 2);
}

TEST(InstanceMask, RejectsBadRunSum) {
  EXPECT_THROW(InstanceMask(3, 2, {1, 2}), DataError);
  EXPECT_NO_THROW(InstanceMask(3, 2, {1, 2, 3}));
}

TEST(InstanceMask, RoundTripProperty) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 512);
  std::uniform_real_distribution<double> dens(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const int w = i < 900 ? dim(rng) % 64 + 1 : dim(rng), h = i < 900 ? dim(rng) % 64 + 1 : dim(rng);
    const Bitmap b = randomBitmap(rng, w, h, dens(rng));
    const auto m = InstanceMask::fromBitmap(b);
    ASSERT_TRUE((m.toBitmap() == b).all());
    std::uint64_t sum = 0, ones = 0;
    for (std::size_t k = 0; k < m.counts().size(); ++k) {
      sum += m.counts()[k];
      if (k % 2) ones += m.counts()[k];
    }
    ASSERT_EQ(sum, std::uint64_t(w) * h);
    ASSERT_EQ(ones, m.area());
    ASSERT_EQ(m.area(), std::uint64_t((b != 0).count()));
  }
}

TEST(MaskIou, Examples) {
  const auto a = rectMask(8, 8, 0, 0, 2, 2);
  const auto b = rectMask(8, 8, 1, 0, 2, 2);
  EXPECT_DOUBLE_EQ(maskIou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(maskIou(a, rectMask(8, 8, 5, 5, 2, 2)), 0.0);
  EXPECT_DOUBLE_EQ(maskIou(a, b), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(maskIou(InstanceMask::empty(8, 8), InstanceMask::empty(8, 8)), 0.0);
  EXPECT_THROW(maskIou(a, rectMask(8, 7, 0, 0, 1, 1)), ArgumentError);
}

TEST(MaskIou, SymmetricAndBoundedAgainstBitmaps) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i) {
    const Bitmap x = randomBitmap(rng, 17, 13, 0.4), y = randomBitmap(rng, 17, 13, 0.4);
    const auto a = InstanceMask::fromBitmap(x), b = InstanceMask::fromBitmap(y);
    const auto xb = x != 0, yb = y != 0;
    const double inter = double((xb && yb).count()), uni = double((xb || yb).count());
    const double expect = uni > 0 ? inter / uni : 0.0;
    EXPECT_DOUBLE_EQ(maskIou(a, b), expect);
    EXPECT_DOUBLE_EQ(maskIou(b, a), expect);
    EXPECT_EQ(intersectionArea(a, b), std::uint64_t(inter));
    EXPECT_TRUE((maskUnion(a, b).toBitmap() == (xb || yb).cast<std::uint8_t>()).all());
    if (a.area() > 0) EXPECT_DOUBLE_EQ(maskIou(a, a), 1.0);
  }
}

TEST(InstanceMask, BoundingBox) {
  EXPECT_EQ(rectMask(10, 8, 3, 2, 4, 5).bbox(), (BoundingBox{3, 2, 4, 5}));
  EXPECT_EQ(InstanceMask::empty(10, 8).bbox(), (BoundingBox{0, 0, 0, 0}));
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const Bitmap b = randomBitmap(rng, 9, 7, 0.05);
    const auto box = InstanceMask::fromBitmap(b).bbox();
    int x0 = 9, y0 = 7, x1 = -1, y1 = -1;
    for (int u = 0; u < 9; ++u)
      for (int v = 0; v < 7; ++v)
        if (b(v, u)) {
          x0 = std::min(x0, u), x1 = std::max(x1, u);
          y0 = std::min(y0, v), y1 = std::max(y1, v);
        }
    if (x1 < 0) {
      EXPECT_EQ(box, (BoundingBox{0, 0, 0, 0}));
    } else {
      EXPECT_EQ(box, (BoundingBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1}));
    }
  }
}

TEST(RleString, KnownEncoding) {
  // Reference values from the COCO tooling's compact encoding.
  EXPECT_EQ(encodeRleString({0, 1, 2, 1, 2}), "01200");
  EXPECT_EQ(encodeRleString({}), "");
  EXPECT_EQ(encodeRleString({100}), "T3");
}

TEST(RleString, RoundTripProperty) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 500; ++i) {
    const Bitmap b = randomBitmap(rng, 1 + i % 70, 1 + i % 50, (i % 10) / 10.0);
    const auto m = InstanceMask::fromBitmap(b);
    EXPECT_EQ(decodeRleString(encodeRleString(m.counts())), m.counts());
  }
  std::vector<std::uint32_t> big = {0, 4000000000u, 1, 123456789, 5};
  EXPECT_EQ(decodeRleString(encodeRleString(big)), big);
}

TEST(RleString, RejectsGarbage) {
  EXPECT_THROW(decodeRleString("!!"), ParseError);
  EXPECT_THROW(decodeRleString("0 1"), ParseError);
  EXPECT_THROW(decodeRleString("o"), ParseError);  // continuation bit with no follow-up
}

}  // namespace
}  // namespace binseg
