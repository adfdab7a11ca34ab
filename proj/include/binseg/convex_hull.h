#pragma once

#include <vector>

#include "binseg/types.h"

namespace binseg {

// A maximal planar face of a convex hull: the union of coplanar hull
// triangles, described by its outward unit normal, plane offset
// (normal . x == offset on the plane) and counter-clockwise boundary polygon.
struct HullFacet {
  Vec3 normal;
  double offset = 0;
  std::vector<Vec3> polygon;
  double area = 0;
};

struct ConvexHull {
  std::vector<Vec3> points;          // hull vertices
  std::vector<Triangle> triangles;   // outward-wound, indices into points
  std::vector<HullFacet> facets;

  double volume() const;
  Vec3 centroid() const;  // centroid of the enclosed solid
};

// Incremental hull over the input points. Throws DataError("flat mesh") if
// the points do not span three dimensions.
ConvexHull computeConvexHull(const std::vector<Vec3>& points);

}  // namespace binseg
