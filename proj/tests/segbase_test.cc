#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "binseg/heapgen.h"
#include "binseg/primitives.h"
#include "binseg/render.h"
#include "binseg/segbase.h"
#include "test_util.h"

namespace binseg {
namespace {

OrganizedCloud cloudOf(const std::vector<Vec3>& pts) {
  OrganizedCloud c;
  c.width = int(pts.size());
  c.height = 1;
  c.points = pts;
  c.valid.assign(pts.size(), 1);
  return c;
}

TEST(Inpaint, IdentityWithoutHoles) {
  DepthImage img(5, 4);
  img.array().setConstant(0.8f);
  img(2, 2) = 0.9f;
  const auto r = inpaintDepth(img);
  EXPECT_EQ(r.image, img);
  EXPECT_FALSE(r.all_invalid);
}

TEST(Inpaint, SingleHoleInConstantField) {
  DepthImage img(5, 5);
  img.array().setConstant(1.25f);
  img(2, 2) = 0;
  EXPECT_EQ(inpaintDepth(img).image(2, 2), 1.25f);
}

TEST(Inpaint, FirstPassAveragesValidNeighbors) {
  // The hole at (1, 1) sees valid neighbors 1.0 and 2.0 only; everything else
  // is invalid and gets filled later from already-filled pixels.
  DepthImage img(3, 3);
  img(0, 0) = 1.0f;
  img(2, 2) = 2.0f;
  const DepthImage out = inpaintDepth(img).image;
  EXPECT_FLOAT_EQ(out(1, 1), 1.5f);
  EXPECT_EQ(out(0, 0), 1.0f);
  EXPECT_EQ(out(2, 2), 2.0f);
  EXPECT_EQ(out.validCount(), 9u);
}

TEST(Inpaint, AllInvalidUnchangedAndFlagged) {
  const DepthImage img(6, 4);
  const auto r = inpaintDepth(img);
  EXPECT_TRUE(r.all_invalid);
  EXPECT_EQ(r.image, img);
}

TEST(Inpaint, Idempotent) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<float> d(0.5f, 1.0f);
  std::bernoulli_distribution hole(0.3);
  for (int i = 0; i < 20; ++i) {
    DepthImage img(40, 30);
    for (int v = 0; v < 30; ++v)
      for (int u = 0; u < 40; ++u) img(u, v) = hole(rng) ? 0.0f : d(rng);
    const DepthImage once = inpaintDepth(img).image;
    EXPECT_EQ(inpaintDepth(once).image, once);
    for (int v = 0; v < 30; ++v)
      for (int u = 0; u < 40; ++u)
        if (img.valid(u, v)) EXPECT_EQ(once(u, v), img(u, v));
  }
}

TEST(Backproject, PixelCentersAndValidity) {
  const CameraIntrinsics k{500, 500, 2, 1.5, 4, 3};
  DepthImage img(4, 3);
  img(3, 2) = 2.0f;
  const OrganizedCloud c = backproject(img, k);
  EXPECT_EQ(c.validIndices(), std::vector<int>{2 * 4 + 3});
  EXPECT_TRUE(c.points[11].isApprox(deproject(k, 3.5, 2.5, 2.0)));
}

TEST(SubtractBackground, Examples) {
  DepthImage bg(4, 1), img(4, 1);
  bg.array().setConstant(1.0f);
  img.array().setConstant(1.0f);
  EXPECT_TRUE(subtractBackground(img, bg, 0.005).isEmpty());
  img(1, 0) = 0.95f;          // object 5 cm above the floor
  img(2, 0) = 0.0f;           // invalid in the image
  bg(3, 0) = 0.0f;            // invalid in the background
  const Bitmap fg = subtractBackground(img, bg, 0.01).toBitmap();
  EXPECT_EQ(fg(0, 1), 1);
  EXPECT_EQ(fg(0, 2), 0);
  EXPECT_EQ(fg(0, 3), 1);
  EXPECT_EQ(fg(0, 0), 0);
  EXPECT_EQ(subtractBackground(img, bg, 0.1).area(), 1u);  // only the pixel with no background
  EXPECT_THROW(subtractBackground(img, DepthImage(3, 1), 0.01), ArgumentError);
}

TEST(Normals, ExactPlane) {
  std::vector<Vec3> pts;
  const Vec3 n = Vec3(0.2, -0.3, -1).normalized();
  const Vec3 a = n.unitOrthogonal(), b = n.cross(a);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) pts.push_back(Vec3(0, 0, 1) + 0.003 * i * a + 0.003 * j * b);
  const NormalsField f = estimateNormals(cloudOf(pts), 15);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ASSERT_TRUE(f.valid[i]);
    EXPECT_LT((f.normals[i] - n).norm(), 1e-6);  // faces the camera at the origin
    EXPECT_LT(f.curvature[i], 1e-9);
    EXPECT_NEAR(f.normals[i].norm(), 1.0, 1e-6);
  }
}

TEST(Normals, SphereNormalsAreRadial) {
  const Vec3 center(0, 0, 1);
  const double r = 0.1;
  std::vector<Vec3> pts = {center - Vec3(0, 0, r)};
  for (double th = 0.01; th < 1.0; th += 0.01)
    for (double ph = 0; ph < 2 * std::numbers::pi; ph += 0.01 / std::max(std::sin(th), 0.05))
      pts.push_back(center + r * Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), -std::cos(th)));
  const NormalsField f = estimateNormals(cloudOf(pts), 15);
  double worst = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ASSERT_TRUE(f.valid[i]);
    const Vec3 radial = (pts[i] - center).normalized();
    worst = std::max(worst, std::acos(std::clamp(f.normals[i].dot(radial), -1.0, 1.0)));
    EXPECT_LE(f.curvature[i], 1.0 / 3.0 + 1e-12);
  }
  EXPECT_LT(worst * 180 / std::numbers::pi, 2.0);
}

TEST(Normals, IsolatedPointIsInvalid) {
  const NormalsField f = estimateNormals(cloudOf({Vec3(0, 0, 1)}), 5);
  EXPECT_FALSE(f.valid[0]);
  EXPECT_THROW(estimateNormals(cloudOf({Vec3(0, 0, 1)}), 2), ArgumentError);
}

TEST(EuclideanCluster, SimpleCases) {
  EuclideanParams p{0.01, 1, 100};
  EXPECT_EQ(euclideanCluster(cloudOf({{0, 0, 1}, {0.005, 0, 1}}), p).size(), 1u);
  std::vector<Vec3> pts;
  for (int i = 0; i < 30; ++i) pts.emplace_back(0.002 * (i % 5), 0.002 * (i / 5), 1);
  for (int i = 0; i < 20; ++i) pts.emplace_back(0.1 + 0.002 * (i % 5), 0.002 * (i / 5), 1);
  const auto c = euclideanCluster(cloudOf(pts), EuclideanParams{0.003, 1, 1000});
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].size(), 30u);
  EXPECT_EQ(c[1].size(), 20u);
  EXPECT_EQ(euclideanCluster(cloudOf(pts), EuclideanParams{0.003, 25, 1000}).size(), 1u);
  EXPECT_EQ(euclideanCluster(cloudOf(pts), EuclideanParams{0.003, 1, 25}).size(), 1u);
}

TEST(EuclideanCluster, MatchesBruteForceComponents) {
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> x(0, 0.1);
  std::uniform_int_distribution<int> size(1, 800);
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<Vec3> pts;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) pts.emplace_back(x(rng), x(rng), 1 + x(rng) * 0.2);
    OrganizedCloud cloud = cloudOf(pts);
    for (std::size_t i = 0; i < cloud.size(); i += 7) cloud.valid[i] = 0;
    const EuclideanParams p{0.004 + 0.001 * (trial % 4), 1 + trial % 3, 10000};
    EXPECT_EQ(euclideanCluster(cloud, p), testing::bruteForceComponents(cloud, p.radius, p.min_cluster, p.max_cluster));
  }
}

// Two half-planes meeting at a right-angle crease along x = 0, seen from
// the camera at the origin, with exact normals.
void creaseCloud(OrganizedCloud& cloud, NormalsField& normals) {
  std::vector<Vec3> pts;
  std::vector<Vec3> ns;
  const Vec3 na = Vec3(1, 0, -1).normalized(), nb = Vec3(-1, 0, -1).normalized();
  for (int i = -20; i <= 20; ++i)
    for (int j = -20; j <= 20; ++j) {
      const double x = 0.005 * i, y = 0.005 * j;
      pts.emplace_back(x, y, 1 + std::abs(x));
      ns.push_back(i <= 0 ? nb : na);
    }
  cloud = cloudOf(pts);
  normals.normals = ns;
  normals.curvature.assign(pts.size(), 0.0);
  normals.valid.assign(pts.size(), 1);
}

TEST(RegionGrow, PerpendicularPlanesSplitAtCrease) {
  OrganizedCloud cloud;
  NormalsField normals;
  creaseCloud(cloud, normals);
  RegionGrowingParams p;
  p.angle_threshold = std::numbers::pi / 4;
  p.min_cluster = 10;
  const auto regions = regionGrow(cloud, normals, p);
  ASSERT_EQ(regions.size(), 2u);
  for (const auto& r : regions) {
    const double side = cloud.points[r.front()].x();
    for (int i : r) EXPECT_EQ(cloud.points[i].x() <= 0, side <= 0);
  }
  EXPECT_EQ(regions[0].size() + regions[1].size(), cloud.size());
}

TEST(RegionGrow, SinglePlaneAndPermissiveThresholds) {
  OrganizedCloud cloud;
  NormalsField normals;
  creaseCloud(cloud, normals);
  RegionGrowingParams p;
  p.angle_threshold = std::numbers::pi;
  p.curvature_threshold = 1.0;
  p.min_cluster = 1;
  EXPECT_EQ(regionGrow(cloud, normals, p).size(), 1u);

  // Estimated normals on a single plane.
  std::vector<Vec3> pts;
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) pts.emplace_back(0.003 * i, 0.003 * j, 1.0);
  const OrganizedCloud plane = cloudOf(pts);
  RegionGrowingParams q;
  q.min_cluster = 10;
  EXPECT_EQ(regionGrow(plane, estimateNormals(plane, q.k_neighbors), q).size(), 1u);
}

TEST(RegionGrow, PartitionAndAnglePredicate) {
  const ModelDatabase db = testing::smallDatabase();
  GenConfig c;
  const MeshCatalog catalog(db, c);
  const SceneState s = sampleHeapState(sceneSeed(63, 0), c, db);
  const DepthImage img = renderDepth(s, catalog, s.camera, RenderSettings{});
  OrganizedCloud cloud = backproject(img, s.camera.intrinsics);
  const DepthImage bg = renderEmptyBin(c, s.camera, RenderSettings{});
  const Bitmap fg = subtractBackground(img, bg, 0.005).toBitmap();
  for (int v = 0; v < cloud.height; ++v)
    for (int u = 0; u < cloud.width; ++u)
      if (!fg(v, u)) cloud.valid[std::size_t(v) * cloud.width + u] = 0;
  RegionGrowingParams p;
  const NormalsField n = estimateNormals(cloud, p.k_neighbors);
  const auto regions = regionGrow(cloud, n, p);
  std::vector<int> owner(cloud.size(), -1);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    EXPECT_TRUE(std::is_sorted(regions[r].begin(), regions[r].end()));
    EXPECT_GE(int(regions[r].size()), p.min_cluster);
    for (int i : regions[r]) {
      ASSERT_EQ(owner[i], -1);
      ASSERT_TRUE(cloud.valid[i] && n.valid[i]);
      owner[i] = int(r);
    }
  }
  for (std::size_t r = 1; r < regions.size(); ++r) EXPECT_GE(regions[r - 1].size(), regions[r].size());
}

TEST(ClustersToMasks, Bijection) {
  const auto masks = clustersToMasks({{0, 5, 6}, {1}}, 4, 2);
  ASSERT_EQ(masks.size(), 2u);
  EXPECT_EQ(masks[0].area() + masks[1].area(), 4u);
  EXPECT_EQ(intersectionArea(masks[0], masks[1]), 0u);
  const Bitmap b = masks[0].toBitmap();
  EXPECT_EQ(b(0, 0), 1);
  EXPECT_EQ(b(1, 1), 1);  // index 5 = row 1, column 1
  EXPECT_EQ(b(1, 2), 1);
  EXPECT_TRUE(clustersToMasks({}, 4, 2).empty());
}

// Boxes on the bin floor under a top-down camera.
class SegmentScene : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<std::pair<std::string, TriangleMesh>> meshes;
    meshes.emplace_back("box", makeBox({-0.03, -0.03, 0}, {0.03, 0.03, 0.04}));
    db_ = ModelDatabase::fromMeshes(std::move(meshes));
    catalog_ = std::make_unique<MeshCatalog>(db_, config_);
    scene_.camera.intrinsics = {550, 550, 256, 192, 512, 384};
    scene_.camera.pose = lookAtPose(0.7, std::numbers::pi / 2, 0.3, 0);
    scene_.background = {{kTableId, {}, ObjectKind::kBackground}, {kBinId, {}, ObjectKind::kBackground}};
  }
  void add(double x, double y) {
    scene_.foreground.push_back({"box", RigidTransform(Mat3::Identity(), Vec3(x, y, 0)), ObjectKind::kForeground});
  }
  std::vector<ModalMask> truth(const DepthImage& full) const {
    std::vector<DepthImage> iso;
    for (std::size_t i = 0; i < scene_.foreground.size(); ++i)
      iso.push_back(renderObjectIsolated(scene_, *catalog_, scene_.camera, i, settings_));
    return extractModalMasks(full, iso, settings_.mask_threshold);
  }
  ModelDatabase db_;
  GenConfig config_;
  RenderSettings settings_;
  SceneState scene_;
  std::unique_ptr<MeshCatalog> catalog_;
};

TEST_F(SegmentScene, SeparatedBoxes) {
  add(-0.1, 0);
  add(0.1, 0.03);
  const DepthImage full = renderDepth(scene_, *catalog_, scene_.camera, settings_);
  const DepthImage bg = renderEmptyBin(config_, scene_.camera, settings_);
  const auto gt = truth(full);
  for (SegMethod m : {SegMethod::kEuclidean, SegMethod::kRegionGrowing}) {
    const auto pred = segment(full, scene_.camera, bg, SegParams{}, m);
    ASSERT_EQ(pred.size(), 2u);
    for (const auto& p : pred) {
      EXPECT_EQ(p.score, 1.0);
      // Pixels within background_delta of the floor are lost at the box
      // bottoms; everything predicted must still lie on the object.
      double best = 0, inside = 0;
      for (const auto& g : gt) {
        best = std::max(best, maskIou(p.mask, g.mask));
        inside = std::max(inside, double(intersectionArea(p.mask, g.mask)) / double(p.mask.area()));
      }
      EXPECT_GT(best, 0.9);
      EXPECT_GT(inside, 0.99);
    }
    EXPECT_GE(pred[0].mask.area(), pred[1].mask.area());
  }
}

TEST_F(SegmentScene, EmptyBinGivesNothing) {
  const DepthImage bg = renderEmptyBin(config_, scene_.camera, settings_);
  EXPECT_TRUE(segment(bg, scene_.camera, bg, SegParams{}, SegMethod::kEuclidean).empty());
  EXPECT_TRUE(segment(bg, scene_.camera, bg, SegParams{}, SegMethod::kRegionGrowing).empty());
}

TEST_F(SegmentScene, AbuttingBoxesUndersegment) {
  add(-0.03, 0);
  add(0.03, 0);
  const DepthImage full = renderDepth(scene_, *catalog_, scene_.camera, settings_);
  const DepthImage bg = renderEmptyBin(config_, scene_.camera, settings_);
  const auto pred = segment(full, scene_.camera, bg, SegParams{}, SegMethod::kEuclidean);
  ASSERT_EQ(pred.size(), 1u);
  const auto gt = truth(full);
  ASSERT_EQ(gt.size(), 2u);
  EXPECT_GT(maskIou(pred[0].mask, maskUnion(gt[0].mask, gt[1].mask)), 0.95);
}

TEST_F(SegmentScene, Deterministic) {
  add(0.02, -0.04);
  add(-0.1, 0.05);
  const DepthImage full = renderDepth(scene_, *catalog_, scene_.camera, settings_);
  const DepthImage bg = renderEmptyBin(config_, scene_.camera, settings_);
  for (SegMethod m : {SegMethod::kEuclidean, SegMethod::kRegionGrowing}) {
    const auto a = segment(full, scene_.camera, bg, SegParams{}, m);
    const auto b = segment(full, scene_.camera, bg, SegParams{}, m);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].mask, b[i].mask);
  }
}

TEST(SegParams, Validate) {
  EXPECT_NO_THROW(SegParams{}.validate());
  SegParams p;
  p.euclidean.radius = 0;
  EXPECT_THROW(p.validate(), ArgumentError);
  p = SegParams{};
  p.euclidean.min_cluster = 10;
  p.euclidean.max_cluster = 5;
  EXPECT_THROW(p.validate(), ArgumentError);
  p = SegParams{};
  p.region_growing.angle_threshold = std::numbers::pi;
  EXPECT_THROW(p.validate(), ArgumentError);
}

}  // namespace
}  // namespace binseg
