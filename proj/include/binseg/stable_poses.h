#pragma once

#include <vector>

#include "binseg/convex_hull.h"
#include "binseg/types.h"

namespace binseg {

enum class PoseWeighting { kFacetArea, kUniform };

struct StablePose {
  Mat3 rotation;        // object frame -> resting frame; support facet faces -z
  double probability;
  Vec3 facet_normal;    // outward normal of the support facet, object frame
};

// Solid centroid of the mesh, falling back to the hull centroid when the mesh
// is too open for its signed volume to be meaningful.
Vec3 centerOfMass(const TriangleMesh& mesh, const ConvexHull& hull);

// Quasi-static resting poses: one per hull facet whose polygon strictly
// contains (by kSupportMargin) the projection of the center of mass.
std::vector<StablePose> computeStablePoses(
    const TriangleMesh& mesh, PoseWeighting weighting = PoseWeighting::kFacetArea);
std::vector<StablePose> computeStablePoses(
    const ConvexHull& hull, const Vec3& center_of_mass,
    PoseWeighting weighting = PoseWeighting::kFacetArea);

inline constexpr double kSupportMargin = 1e-6;

// Signed distance from `p` (assumed on the facet plane) to the facet
// boundary; positive inside.
double facetInteriorDistance(const HullFacet& facet, const Vec3& p);

// Appends a box slab of the given thickness under the mesh, spanning its
// x-y bounding rectangle (a flat "cardboard" backing). Triangle soup, no CSG.
TriangleMesh augmentWithBacking(const TriangleMesh& mesh, double thickness);

}  // namespace binseg
