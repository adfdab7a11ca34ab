#pragma once

#include <cstdint>
#include <filesystem>

#include "binseg/types.h"

namespace binseg {

// Appends an axis-aligned box [lo, hi] (12 outward-wound triangles).
void appendBox(TriangleMesh& mesh, const Vec3& lo, const Vec3& hi);

TriangleMesh makeBox(const Vec3& lo, const Vec3& hi);
// Closed n-gon prism along z, base at z = 0.
TriangleMesh makeCylinder(double radius, double height, int segments);
// Closed cone along z, base at z = 0.
TriangleMesh makeCone(double radius, double height, int segments);
// UV sphere centered at the origin.
TriangleMesh makeSphere(double radius, int rings, int segments);
// Triangular prism: right triangle (a x b) in x-z extruded along y by `length`.
TriangleMesh makeWedge(double a, double b, double length);
TriangleMesh makeRegularTetrahedron(double edge);

// Writes `count` randomly sized primitive shapes (boxes, cylinders, cones,
// spheres, wedges, L-blocks) plus a models.json manifest into `dir`.
// Roughly a fifth are flagged for cardboard backing; a third are stored as
// binary STL, the rest as OBJ. Deterministic in `seed`.
void writeModelCorpus(const std::filesystem::path& dir, int count,
                      std::uint64_t seed);

}  // namespace binseg
