#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "binseg/convex_hull.h"
#include "binseg/primitives.h"
#include "binseg/stable_poses.h"
#include "test_util.h"

namespace binseg {
namespace {

TEST(ConvexHull, CubeHasSixSquareFacets) {
  const auto hull = computeConvexHull(makeBox({0, 0, 0}, {1, 1, 1}).vertices);
  EXPECT_EQ(hull.points.size(), 8u);
  ASSERT_EQ(hull.facets.size(), 6u);
  for (const auto& f : hull.facets) {
    EXPECT_NEAR(f.area, 1.0, 1e-12);
    EXPECT_EQ(f.polygon.size(), 4u);
  }
  EXPECT_NEAR(hull.volume(), 1.0, 1e-12);
  EXPECT_TRUE(hull.centroid().isApprox(Vec3(0.5, 0.5, 0.5), 1e-12));
}

TEST(ConvexHull, RandomPointsContainAll) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n;
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i) pts.emplace_back(n(rng), n(rng), n(rng));
  const auto hull = computeConvexHull(pts);
  for (const auto& p : pts)
    for (const auto& f : hull.facets) EXPECT_LE(f.normal.dot(p) - f.offset, 1e-9);
  // Every hull triangle has all points on its inner side.
  for (const auto& t : hull.triangles) {
    const Vec3 a = hull.points[t[0]], b = hull.points[t[1]], c = hull.points[t[2]];
    const Vec3 nrm = (b - a).cross(c - a);
    for (const auto& p : pts) EXPECT_LE(nrm.dot(p - a), 1e-9);
  }
  double area = 0;
  for (const auto& f : hull.facets) area += f.area;
  double tri_area = 0;
  for (const auto& t : hull.triangles)
    tri_area += 0.5 * (hull.points[t[1]] - hull.points[t[0]]).cross(hull.points[t[2]] - hull.points[t[0]]).norm();
  EXPECT_NEAR(area, tri_area, 1e-9);
}

TEST(ConvexHull, FlatInputThrows) {
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  EXPECT_THROW(computeConvexHull(pts), DataError);
  EXPECT_THROW(computeConvexHull({{0, 0, 0}, {1, 1, 1}}), DataError);
}

TEST(StablePoses, UnitCube) {
  const auto poses = computeStablePoses(makeBox({0, 0, 0}, {1, 1, 1}));
  ASSERT_EQ(poses.size(), 6u);
  for (const auto& p : poses) {
    EXPECT_NEAR(p.probability, 1.0 / 6.0, 1e-12);
    EXPECT_TRUE((p.rotation * p.facet_normal).isApprox(Vec3(0, 0, -1), 1e-12));
    EXPECT_TRUE(RigidTransform(p.rotation, Vec3::Zero()).isProper());
  }
}

TEST(StablePoses, RegularTetrahedron) {
  const auto poses = computeStablePoses(makeRegularTetrahedron(0.1));
  ASSERT_EQ(poses.size(), 4u);
  for (const auto& p : poses) EXPECT_NEAR(p.probability, 0.25, 1e-12);
}

TEST(StablePoses, TallCylinderRestsOnItsSide) {
  const auto mesh = makeCylinder(0.01, 0.2, 32);
  const auto poses = computeStablePoses(mesh);
  double side = 0, caps = 0;
  for (const auto& p : poses) (std::abs(p.facet_normal.z()) > 0.5 ? caps : side) += p.probability;
  EXPECT_GT(side, 0.9);
  EXPECT_NEAR(side + caps, 1.0, 1e-9);
  const auto uniform = computeStablePoses(mesh, PoseWeighting::kUniform);
  for (const auto& p : uniform) EXPECT_NEAR(p.probability, 1.0 / uniform.size(), 1e-12);
}

TEST(StablePoses, ComProjectsInsideSupport) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> s(0.01, 0.1);
  for (int i = 0; i < 30; ++i) {
    TriangleMesh mesh = i % 3 == 0   ? makeWedge(s(rng), s(rng), s(rng))
                        : i % 3 == 1 ? makeCone(s(rng), s(rng), 10 + i)
                                     : makeBox({0, 0, 0}, {s(rng), s(rng), s(rng)});
    const auto hull = computeConvexHull(mesh.vertices);
    const Vec3 com = centerOfMass(mesh, hull);
    const auto poses = computeStablePoses(hull, com);
    ASSERT_FALSE(poses.empty());
    double total = 0;
    for (const auto& p : poses) {
      total += p.probability;
      EXPECT_GE(p.probability, 0);
      const HullFacet* facet = nullptr;
      for (const auto& f : hull.facets)
        if (f.normal.isApprox(p.facet_normal, 1e-12)) facet = &f;
      ASSERT_NE(facet, nullptr);
      const Vec3 foot = com - (facet->normal.dot(com) - facet->offset) * facet->normal;
      EXPECT_GT(facetInteriorDistance(*facet, foot), kSupportMargin);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(StablePoses, OverhangingFacetIsUnstable) {
  // Prism over the obtuse triangle (0,0), (1,0), (3,1) in x-z. The centroid
  // x = 4/3 lies beyond the bottom edge [0, 1], so that face cannot support it.
  std::vector<Vec3> pts;
  for (double y : {0.0, 1.0})
    for (auto [x, z] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {3.0, 1.0}}) pts.emplace_back(x, y, z);
  const auto hull = computeConvexHull(pts);
  ASSERT_EQ(hull.facets.size(), 5u);
  const auto poses = computeStablePoses(hull, Vec3(4.0 / 3.0, 0.5, 1.0 / 3.0));
  EXPECT_EQ(poses.size(), 4u);
  for (const auto& p : poses) EXPECT_FALSE(p.facet_normal.isApprox(Vec3(0, 0, -1), 1e-9));
}

TEST(Backing, SlabBelowBoundingRectangle) {
  const TriangleMesh cube = makeBox({0, 0, 0}, {1, 1, 1});
  const TriangleMesh backed = augmentWithBacking(cube, 0.01);
  const auto a = cube.bounds(), b = backed.bounds();
  EXPECT_NEAR(b.sizes().z() - a.sizes().z(), 0.01, 1e-12);
  EXPECT_NEAR(b.min().x(), a.min().x(), 1e-12);
  EXPECT_NEAR(b.max().y(), a.max().y(), 1e-12);
  EXPECT_EQ(backed.triangles.size(), cube.triangles.size() + 12);
  const TriangleMesh cone = makeCone(0.05, 0.1, 16);
  const auto hull = computeConvexHull(augmentWithBacking(cone, 0.005).vertices);
  const auto cb = cone.bounds();
  // The slab's footprint is the full x-y bounding rectangle.
  double bottom_area = 0;
  for (const auto& f : hull.facets)
    if (f.normal.z() < -0.999) bottom_area = f.area;
  EXPECT_NEAR(bottom_area, cb.sizes().x() * cb.sizes().y(), 1e-12);
}

}  // namespace
}  // namespace binseg
