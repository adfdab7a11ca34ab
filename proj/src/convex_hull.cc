#include "binseg/convex_hull.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

namespace binseg {

namespace {

struct Face {
  std::array<int, 3> v;
  Vec3 normal;  // unit, outward
  double offset;
  std::vector<int> outside;  // points strictly above the plane
  bool alive = true;
};

Face makeFace(const std::vector<Vec3>& pts, int a, int b, int c) {
  Face f;
  f.v = {a, b, c};
  f.normal = (pts[b] - pts[a]).cross(pts[c] - pts[a]).normalized();
  f.offset = f.normal.dot(pts[a]);
  return f;
}

double distance(const Face& f, const Vec3& p) { return f.normal.dot(p) - f.offset; }

// 2D convex hull (Andrew's monotone chain), counter-clockwise, no collinear
// points.
std::vector<int> hull2d(const std::vector<Eigen::Vector2d>& p, double eps) {
  std::vector<int> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return p[a].x() < p[b].x() || (p[a].x() == p[b].x() && p[a].y() < p[b].y());
  });
  auto cross = [&](int o, int a, int b) {
    const Eigen::Vector2d u = p[a] - p[o], w = p[b] - p[o];
    return u.x() * w.y() - u.y() * w.x();
  };
  std::vector<int> h(2 * idx.size());
  std::size_t k = 0;
  for (int i : idx) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], i) <= eps) --k;
    h[k++] = i;
  }
  for (std::size_t j = idx.size() - 1, t = k + 1; j-- > 0;) {
    const int i = idx[j];
    while (k >= t && cross(h[k - 2], h[k - 1], i) <= eps) --k;
    h[k++] = i;
  }
  h.resize(k > 1 ? k - 1 : k);
  return h;
}

}  // namespace

ConvexHull computeConvexHull(const std::vector<Vec3>& input) {
  // Deduplicate exactly equal points first.
  std::vector<Vec3> pts = input;
  std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 4) throw DataError("flat mesh");

  Eigen::AlignedBox3d box;
  for (const Vec3& p : pts) box.extend(p);
  const double scale = std::max(box.diagonal().norm(), 1e-300);
  const double eps = 1e-10 * scale;

  // Initial tetrahedron from extreme points.
  int i0 = 0, i1 = 0;
  for (int i = 1; i < int(pts.size()); ++i) {
    if (pts[i].x() < pts[i0].x()) i0 = i;
    if (pts[i].x() > pts[i1].x()) i1 = i;
  }
  if (i0 == i1) {
    double best = -1;
    for (int i = 0; i < int(pts.size()); ++i) {
      const double d = (pts[i] - pts[i0]).norm();
      if (d > best) best = d, i1 = i;
    }
  }
  int i2 = -1;
  double best = eps * scale;
  for (int i = 0; i < int(pts.size()); ++i) {
    const double d = (pts[i1] - pts[i0]).cross(pts[i] - pts[i0]).norm();
    if (d > best) best = d, i2 = i;
  }
  if (i2 < 0) throw DataError("flat mesh");
  const Vec3 n012 = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  int i3 = -1;
  best = 1e-9 * scale;
  for (int i = 0; i < int(pts.size()); ++i) {
    const double d = std::abs(n012.dot(pts[i] - pts[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (i3 < 0) throw DataError("flat mesh");

  std::vector<Face> faces;
  if (n012.dot(pts[i3] - pts[i0]) > 0) std::swap(i1, i2);
  faces.push_back(makeFace(pts, i0, i1, i2));
  faces.push_back(makeFace(pts, i0, i3, i1));
  faces.push_back(makeFace(pts, i1, i3, i2));
  faces.push_back(makeFace(pts, i2, i3, i0));

  for (int i = 0; i < int(pts.size()); ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    for (Face& f : faces) {
      if (distance(f, pts[i]) > eps) {
        f.outside.push_back(i);
        break;
      }
    }
  }

  for (std::size_t cursor = 0; cursor < faces.size(); ++cursor) {
    if (!faces[cursor].alive || faces[cursor].outside.empty()) continue;
    // Farthest outside point of this face.
    int apex = -1;
    double far = -1;
    for (int i : faces[cursor].outside) {
      const double d = distance(faces[cursor], pts[i]);
      if (d > far) far = d, apex = i;
    }
    // Visible faces and the horizon around them.
    std::vector<std::size_t> visible;
    for (std::size_t f = 0; f < faces.size(); ++f)
      if (faces[f].alive && distance(faces[f], pts[apex]) > eps) visible.push_back(f);
    std::map<std::pair<int, int>, int> edges;
    for (std::size_t f : visible)
      for (int k = 0; k < 3; ++k) ++edges[{faces[f].v[k], faces[f].v[(k + 1) % 3]}];
    std::vector<int> orphans;
    for (std::size_t f : visible) {
      faces[f].alive = false;
      for (int i : faces[f].outside)
        if (i != apex) orphans.push_back(i);
      faces[f].outside.clear();
    }
    const std::size_t first_new = faces.size();
    for (const auto& [e, count] : edges) {
      if (edges.count({e.second, e.first})) continue;
      faces.push_back(makeFace(pts, e.first, e.second, apex));
    }
    std::sort(orphans.begin(), orphans.end());
    for (int i : orphans) {
      for (std::size_t f = first_new; f < faces.size(); ++f) {
        if (distance(faces[f], pts[i]) > eps) {
          faces[f].outside.push_back(i);
          break;
        }
      }
    }
    // Revisit from the start; new faces are appended after `cursor`.
    cursor = std::size_t(-1);
  }

  ConvexHull hull;
  std::map<int, std::uint32_t> remap;
  auto vid = [&](int i) {
    auto [it, inserted] = remap.try_emplace(i, std::uint32_t(hull.points.size()));
    if (inserted) hull.points.push_back(pts[i]);
    return it->second;
  };
  std::vector<const Face*> alive;
  for (const Face& f : faces) {
    if (!f.alive) continue;
    alive.push_back(&f);
    hull.triangles.push_back({vid(f.v[0]), vid(f.v[1]), vid(f.v[2])});
  }

  // Group coplanar triangles into facets.
  std::vector<int> group(alive.size(), -1);
  const double plane_eps = 1e-9 * scale;
  for (std::size_t t = 0; t < alive.size(); ++t) {
    if (group[t] >= 0) continue;
    HullFacet facet;
    facet.normal = alive[t]->normal;
    facet.offset = alive[t]->offset;
    std::vector<Vec3> verts;
    const int g = int(hull.facets.size());
    for (std::size_t s = t; s < alive.size(); ++s) {
      if (group[s] >= 0) continue;
      const Face& f = *alive[s];
      bool coplanar = f.normal.dot(facet.normal) > 1.0 - 1e-9;
      for (int k = 0; k < 3 && coplanar; ++k)
        coplanar = std::abs(facet.normal.dot(pts[f.v[k]]) - facet.offset) <= plane_eps;
      if (!coplanar) continue;
      group[s] = g;
      for (int k = 0; k < 3; ++k) verts.push_back(pts[f.v[k]]);
      facet.area += 0.5 * (pts[f.v[1]] - pts[f.v[0]]).cross(pts[f.v[2]] - pts[f.v[0]]).norm();
    }
    // Boundary polygon in a plane basis, counter-clockwise about the normal.
    const Vec3 e1 = facet.normal.unitOrthogonal();
    const Vec3 e2 = facet.normal.cross(e1);
    std::vector<Eigen::Vector2d> flat;
    for (const Vec3& v : verts) flat.emplace_back(e1.dot(v), e2.dot(v));
    for (int i : hull2d(flat, 0.0)) facet.polygon.push_back(verts[i]);
    hull.facets.push_back(std::move(facet));
  }
  return hull;
}

double ConvexHull::volume() const {
  double v = 0;
  for (const Triangle& t : triangles)
    v += points[t.a].dot(points[t.b].cross(points[t.c])) / 6.0;
  return v;
}

Vec3 ConvexHull::centroid() const {
  const Vec3 origin = points.front();
  double v = 0;
  Vec3 c = Vec3::Zero();
  for (const Triangle& t : triangles) {
    const Vec3 a = points[t.a] - origin, b = points[t.b] - origin, d = points[t.c] - origin;
    const double tv = a.dot(b.cross(d)) / 6.0;
    v += tv;
    c += tv * (a + b + d) / 4.0;
  }
  return origin + c / v;
}

}  // namespace binseg
