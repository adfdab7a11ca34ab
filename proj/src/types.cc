#include "binseg/types.h"

#include <algorithm>

namespace binseg {

Mat3 yawRotation(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw ArgumentError("focal lengths must be > 0");
  if (width <= 0 || height <= 0) throw ArgumentError("image size must be > 0");
  if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height))
    throw ArgumentError("principal point outside image");
}

namespace {

double triangleArea(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

void TriangleMesh::dropDegenerate() {
  std::erase_if(triangles, [this](const Triangle& t) {
    if (t.a == t.b || t.b == t.c || t.a == t.c) return true;
    return !(triangleArea(vertices[t.a], vertices[t.b], vertices[t.c]) > 0.0);
  });
}

void TriangleMesh::validate() const {
  const auto n = vertices.size();
  for (const Triangle& t : triangles) {
    if (t.a >= n || t.b >= n || t.c >= n)
      throw DataError("triangle index out of range");
  }
}

Eigen::AlignedBox3d TriangleMesh::bounds() const {
  Eigen::AlignedBox3d box;
  for (const Vec3& v : vertices) box.extend(v);
  return box;
}

double TriangleMesh::surfaceArea() const {
  double total = 0;
  for (const Triangle& t : triangles)
    total += triangleArea(vertices[t.a], vertices[t.b], vertices[t.c]);
  return total;
}

}  // namespace binseg
