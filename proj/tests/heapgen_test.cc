#include <cmath>
#include <map>
#include <numbers>

#include <gtest/gtest.h>

#include "binseg/heapgen.h"
#include "binseg/primitives.h"
#include "test_util.h"

namespace binseg {
namespace {

double truncatedPoissonMean(double lambda, int lo, int hi) {
  double z = 0, m = 0, p = std::exp(-lambda);  // P(0)
  for (int k = 1; k <= hi; ++k) {
    p *= lambda / k;
    if (k < lo) continue;
    z += p;
    m += k * p;
  }
  return m / z;
}

TEST(ObjectCount, AnalyticMeanOracle) {
  // Direct summation done before the build gave 6.757756929490167.
  EXPECT_NEAR(truncatedPoissonMean(7.5, 1, 10), 6.757756929490167, 1e-12);
}

TEST(ObjectCount, RangeAndMean) {
  Rng rng(41);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const int m = sampleObjectCount(rng, 7.5, 10, 1);
    ASSERT_GE(m, 1);
    ASSERT_LE(m, 10);
    sum += m;
  }
  const double expect = truncatedPoissonMean(7.5, 1, 10);
  EXPECT_LT(std::abs(sum / n - expect) / expect, 0.02);
}

TEST(ObjectCount, TinyLambdaReturnsMin) {
  Rng rng(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sampleObjectCount(rng, 0.001, 10, 1), 1);
}

TEST(SceneSeed, IndependentOfOrder) {
  EXPECT_EQ(sceneSeed(7, 3), sceneSeed(7, 3));
  EXPECT_NE(sceneSeed(7, 3), sceneSeed(7, 4));
  EXPECT_NE(sceneSeed(7, 3), sceneSeed(8, 3));
}

TEST(GenConfig, Validate) {
  GenConfig c;
  EXPECT_NO_THROW(c.validate());
  c.min_fg = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = GenConfig{};
  c.max_fg = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = GenConfig{};
  c.radius = {0.9, 0.6};
  EXPECT_THROW(c.validate(), ArgumentError);
  c = GenConfig{};
  c.elevation = {0.0, 1.0};
  EXPECT_THROW(c.validate(), ArgumentError);
  c = GenConfig{};
  c.elevation = {1.0, 2.0};
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(Settle, FirstObjectRestsOnFloor) {
  const BinGeometry bin;
  HeightField field(bin, 0.002);
  const TriangleMesh cyl = makeCylinder(0.02, 0.05, 20);
  const auto poses = computeStablePoses(cyl);
  Rng rng(43);
  const RigidTransform pose = settleObject(field, bin, cyl, poses, rng);
  double lowest = 1e9;
  for (const auto& v : cyl.vertices) lowest = std::min(lowest, (pose * v).z());
  EXPECT_NEAR(lowest, 0.0, 1e-6);
}

TEST(Settle, CubesStackByEdgeLength) {
  const BinGeometry bin;
  HeightField field(bin, 0.002);
  const double edge = 0.03;
  const TriangleMesh cube = makeBox({0, 0, 0}, {edge, edge, edge});
  const RigidTransform a = dropAt(field, cube, Mat3::Identity(), {0.011, -0.02});
  const RigidTransform b = dropAt(field, cube, Mat3::Identity(), {0.011, -0.02});
  EXPECT_NEAR(a.translation().z(), 0.0, 1e-12);
  EXPECT_NEAR(b.translation().z() - a.translation().z(), edge, 1e-12);
  EXPECT_NEAR(b.translation().x(), a.translation().x(), 1e-15);
}

TEST(Settle, FootprintOfAxisAlignedBox) {
  const BinGeometry bin;
  const HeightField field(bin, 0.01);
  const TriangleMesh box = makeBox({-0.015, -0.015, 0}, {0.015, 0.015, 0.02});
  const auto cells = computeFootprint(field, box, RigidTransform::Identity());
  // Interior [-0.015, 0.015] touches cell rows/cols covering [-0.02, 0.02].
  EXPECT_EQ(cells.size(), 16u);
  for (const auto& c : cells) {
    EXPECT_NEAR(c.z_lo, 0.0, 1e-15);
    EXPECT_NEAR(c.z_hi, 0.02, 1e-15);
  }
}

TEST(Settle, TooLargeObjectFails) {
  const BinGeometry bin;
  HeightField field(bin, 0.002);
  const TriangleMesh slab = makeBox({0, 0, 0}, {0.5, 0.5, 0.5});
  Rng rng(44);
  EXPECT_THROW(settleObject(field, bin, slab, computeStablePoses(slab), rng, 10), PlacementError);
}

TEST(Camera, ZeroWidthIntervalsGiveCenters) {
  GenConfig c;
  c.radius = {0.7, 0.7};
  c.elevation = {1.2, 1.2};
  c.azimuth = {0.5, 0.5};
  c.roll = {0, 0};
  c.fx = c.fy = {550, 550};
  c.cx = {256, 256};
  c.cy = {192, 192};
  Rng rng(45);
  const CameraModel cam = sampleCamera(rng, c);
  EXPECT_EQ(cam.intrinsics.fx, 550);
  EXPECT_EQ(cam.intrinsics.cx, 256);
  EXPECT_NEAR(cam.pose.translation().norm(), 0.7, 1e-12);
  const RigidTransform expected = lookAtPose(0.7, 1.2, 0.5, 0);
  EXPECT_TRUE(cam.pose.rotation().isApprox(expected.rotation()));
}

TEST(Camera, SamplesRespectIntervalsAndLookAtBinCenter) {
  const GenConfig c;
  Rng rng(46);
  for (int i = 0; i < 1000; ++i) {
    const CameraModel cam = sampleCamera(rng, c);
    const Vec3 pos = cam.pose.translation();
    const double r = pos.norm();
    const double el = std::asin(pos.z() / r);
    EXPECT_TRUE(c.radius.contains(r + 1e-12) || c.radius.contains(r - 1e-12));
    EXPECT_GE(el, c.elevation.lo - 1e-9);
    EXPECT_LE(el, c.elevation.hi + 1e-9);
    EXPECT_TRUE(c.fx.contains(cam.intrinsics.fx));
    EXPECT_TRUE(c.cy.contains(cam.intrinsics.cy));
    EXPECT_TRUE(cam.pose.isProper());
    const auto p = project(cam.intrinsics, cam.pose.inverse() * Vec3::Zero());
    EXPECT_NEAR(p.u, cam.intrinsics.cx, 1.0);
    EXPECT_NEAR(p.v, cam.intrinsics.cy, 1.0);
  }
}

TEST(Camera, ZeroRollKeepsWorldUpInImage) {
  // At roll 0 the world z axis projects onto the image's -v direction.
  const RigidTransform pose = lookAtPose(0.8, 1.0, 2.0, 0.0);
  const Vec3 up_cam = pose.rotation().transpose() * Vec3::UnitZ();
  EXPECT_NEAR(up_cam.x(), 0.0, 1e-12);
  EXPECT_LT(up_cam.y(), 0.0);
}

TEST(HeapState, DeterministicAndBounded) {
  const ModelDatabase db = testing::smallDatabase();
  const GenConfig c;
  for (std::uint64_t i = 0; i < 20; ++i) {
    HeapLog log;
    const SceneState a = sampleHeapState(sceneSeed(9, i), c, db, &log);
    const SceneState b = sampleHeapState(sceneSeed(9, i), c, db);
    ASSERT_EQ(a.foreground.size(), b.foreground.size());
    for (std::size_t k = 0; k < a.foreground.size(); ++k) {
      EXPECT_EQ(a.foreground[k].mesh_id, b.foreground[k].mesh_id);
      EXPECT_EQ(a.foreground[k].pose.rotation(), b.foreground[k].pose.rotation());
      EXPECT_EQ(a.foreground[k].pose.translation(), b.foreground[k].pose.translation());
    }
    EXPECT_EQ(a.camera.pose.translation(), b.camera.pose.translation());
    EXPECT_EQ(a.rng_seed, sceneSeed(9, i));
    EXPECT_GE(a.foreground.size(), 1u);
    EXPECT_LE(a.foreground.size(), 10u);
    EXPECT_EQ(int(a.foreground.size()), log.sampled_count - log.placement_failures);
    EXPECT_EQ(a.background.size(), 2u);
    for (const auto& o : a.background) EXPECT_EQ(o.kind, ObjectKind::kBackground);
  }
}

TEST(HeapState, ModelChoiceIsUniform) {
  const ModelDatabase db = testing::smallDatabase();
  const GenConfig c;
  std::map<std::string, double> counts;
  double total = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    HeapLog log;
    const SceneState s = sampleHeapState(sceneSeed(10, i), c, db, &log);
    ASSERT_EQ(log.placement_failures, 0);
    for (const auto& o : s.foreground) {
      counts[o.mesh_id] += 1;
      total += 1;
    }
  }
  ASSERT_EQ(counts.size(), db.size());
  double chi2 = 0;
  const double expect = total / db.size();
  for (const auto& [_, n] : counts) chi2 += (n - expect) * (n - expect) / expect;
  EXPECT_LT(chi2, 13.277);  // chi-square, 4 degrees of freedom, p = 0.01
}

TEST(HeapState, NoInterpenetrationUnderHeightfieldAccounting) {
  const ModelDatabase db = testing::smallDatabase();
  const GenConfig c;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const SceneState s = sampleHeapState(sceneSeed(11, i), c, db);
    const HeightField field(c.bin, c.cell_size);
    std::map<std::size_t, std::vector<std::pair<double, double>>> occupied;
    for (const auto& o : s.foreground) {
      const TriangleMesh& mesh = db.find(o.mesh_id)->mesh;
      for (const auto& v : mesh.vertices) {
        const Vec3 w = o.pose * v;
        ASSERT_GE(w.x(), -c.bin.width / 2 - 1e-9);
        ASSERT_LE(w.x(), c.bin.width / 2 + 1e-9);
        ASSERT_GE(w.y(), -c.bin.depth / 2 - 1e-9);
        ASSERT_LE(w.y(), c.bin.depth / 2 + 1e-9);
        ASSERT_GE(w.z(), -1e-9);
      }
      for (const auto& cell : computeFootprint(field, mesh, o.pose)) {
        for (const auto& [lo, hi] : occupied[cell.cell])
          ASSERT_TRUE(cell.z_lo >= hi - 1e-9 || cell.z_hi <= lo + 1e-9) << "scene " << i;
        occupied[cell.cell].emplace_back(cell.z_lo, cell.z_hi);
      }
    }
  }
}

TEST(HeapState, EveryObjectIsSupported) {
  // Each object's resting height is set by contact: its lowest point in some
  // column meets either the floor or an earlier object's top there.
  const ModelDatabase db = testing::smallDatabase();
  const GenConfig c;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const SceneState s = sampleHeapState(sceneSeed(12, i), c, db);
    HeightField field(c.bin, c.cell_size);
    for (const auto& o : s.foreground) {
      const TriangleMesh& mesh = db.find(o.mesh_id)->mesh;
      const auto cells = computeFootprint(field, mesh, o.pose);
      double gap = 1e9;
      for (const auto& cell : cells) gap = std::min(gap, cell.z_lo - field.at(cell.cell));
      EXPECT_NEAR(gap, 0.0, 1e-9) << "scene " << i << " object " << o.mesh_id;
      for (const auto& cell : cells) field.at(cell.cell) = std::max(field.at(cell.cell), cell.z_hi);
    }
  }
}

TEST(HeapState, EmptyDatabaseThrows) {
  EXPECT_THROW(sampleHeapState(1, GenConfig{}, ModelDatabase{}), ArgumentError);
}

}  // namespace
}  // namespace binseg
