#include "binseg/stable_poses.h"

#include <limits>

#include "binseg/primitives.h"

namespace binseg {

Vec3 centerOfMass(const TriangleMesh& mesh, const ConvexHull& hull) {
  const Vec3 hull_center = hull.centroid();
  double v = 0;
  Vec3 c = Vec3::Zero();
  for (const Triangle& t : mesh.triangles) {
    const Vec3 a = mesh.vertices[t.a] - hull_center;
    const Vec3 b = mesh.vertices[t.b] - hull_center;
    const Vec3 d = mesh.vertices[t.c] - hull_center;
    const double tv = a.dot(b.cross(d)) / 6.0;
    v += tv;
    c += tv * (a + b + d) / 4.0;
  }
  if (std::abs(v) < 0.1 * hull.volume()) return hull_center;
  const Vec3 com = hull_center + c / v;
  for (const HullFacet& f : hull.facets)
    if (f.normal.dot(com) - f.offset > 0) return hull_center;
  return com;
}

double facetInteriorDistance(const HullFacet& facet, const Vec3& p) {
  double dist = std::numeric_limits<double>::infinity();
  const std::size_t n = facet.polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = facet.polygon[i];
    const Vec3& b = facet.polygon[(i + 1) % n];
    const Vec3 inward = facet.normal.cross(b - a).normalized();
    dist = std::min(dist, inward.dot(p - a));
  }
  return dist;
}

std::vector<StablePose> computeStablePoses(const ConvexHull& hull,
                                           const Vec3& com,
                                           PoseWeighting weighting) {
  std::vector<StablePose> poses;
  double total = 0;
  for (const HullFacet& f : hull.facets) {
    if (f.polygon.size() < 3) continue;
    const Vec3 foot = com - (f.normal.dot(com) - f.offset) * f.normal;
    if (!(facetInteriorDistance(f, foot) > kSupportMargin)) continue;
    const double weight = weighting == PoseWeighting::kFacetArea ? f.area : 1.0;
    const Mat3 r =
        Eigen::Quaterniond::FromTwoVectors(f.normal, -Vec3::UnitZ()).toRotationMatrix();
    poses.push_back({r, weight, f.normal});
    total += weight;
  }
  if (poses.empty()) throw DataError("no stable resting facet");
  for (StablePose& p : poses) p.probability /= total;
  return poses;
}

std::vector<StablePose> computeStablePoses(const TriangleMesh& mesh,
                                           PoseWeighting weighting) {
  const ConvexHull hull = computeConvexHull(mesh.vertices);
  return computeStablePoses(hull, centerOfMass(mesh, hull), weighting);
}

TriangleMesh augmentWithBacking(const TriangleMesh& mesh, double thickness) {
  if (!(thickness > 0)) throw ArgumentError("backing thickness must be > 0");
  TriangleMesh out = mesh;
  if (mesh.vertices.empty()) return out;
  const Eigen::AlignedBox3d box = mesh.bounds();
  const Vec3 lo(box.min().x(), box.min().y(), box.min().z() - thickness);
  const Vec3 hi(box.max().x(), box.max().y(), box.min().z());
  appendBox(out, lo, hi);
  return out;
}

}  // namespace binseg
