#pragma once

#include <numbers>
#include <vector>

#include "binseg/mask.h"
#include "binseg/types.h"

namespace binseg {

// Per-pixel camera-frame points; index = v * width + u.
struct OrganizedCloud {
  int width = 0, height = 0;
  std::vector<Vec3> points;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return points.size(); }
  std::vector<int> validIndices() const;
};

struct NormalsField {
  std::vector<Vec3> normals;       // unit, facing the camera
  std::vector<double> curvature;   // lambda0 / (lambda0 + lambda1 + lambda2)
  std::vector<std::uint8_t> valid;
};

struct EuclideanParams {
  double radius = 0.003;
  int min_cluster = 200;
  int max_cluster = 1000000;
};

struct RegionGrowingParams {
  int k_neighbors = 15;
  double angle_threshold = 20.0 * std::numbers::pi / 180.0;
  double curvature_threshold = 0.05;
  int min_cluster = 200;
};

struct SegParams {
  EuclideanParams euclidean;
  RegionGrowingParams region_growing;
  double background_delta = 0.005;

  void validate() const;
};

enum class SegMethod { kEuclidean, kRegionGrowing };

// Point indices of one cluster, ascending.
using Cluster = std::vector<int>;

struct InpaintResult {
  DepthImage image;
  bool all_invalid = false;  // nothing to propagate from; image unchanged
};

// Repeatedly fills every invalid pixel that has a valid 8-neighbor with the
// mean of its valid 8-neighbors (all pixels of a pass read the previous
// pass), until no invalid pixel remains or 10 * max(W, H) passes ran.
InpaintResult inpaintDepth(const DepthImage& img);

OrganizedCloud backproject(const DepthImage& img, const CameraIntrinsics& k);

// Foreground where img is valid and the background is invalid or farther
// than img by more than `delta`. Throws ArgumentError on size mismatch.
InstanceMask subtractBackground(const DepthImage& img, const DepthImage& background,
                                double delta);

// PCA over the k nearest valid points (including the point itself). Points
// with fewer than 3 neighbors or a degenerate neighborhood are invalid.
NormalsField estimateNormals(const OrganizedCloud& cloud, int k);

// Connected components of valid points under "distance <= radius", filtered
// by size, largest first (ties: smaller first index).
std::vector<Cluster> euclideanCluster(const OrganizedCloud& cloud,
                                      const EuclideanParams& params);

// Seeds in ascending curvature (ties by index); a k-nearest neighbor joins
// the region when the angle between its normal and the expanding point's
// normal is within the threshold, and keeps expanding when its curvature is
// within the curvature threshold. Same ordering as euclideanCluster.
std::vector<Cluster> regionGrow(const OrganizedCloud& cloud,
                                const NormalsField& normals,
                                const RegionGrowingParams& params);

std::vector<InstanceMask> clustersToMasks(const std::vector<Cluster>& clusters,
                                          int width, int height);

struct ScoredMask {
  InstanceMask mask;
  double score;
};

// Inpaint, backproject, keep background-subtracted points, cluster. Every
// mask gets score 1.0; output sorted by area descending.
std::vector<ScoredMask> segment(const DepthImage& img, const CameraModel& camera,
                                const DepthImage& background,
                                const SegParams& params, SegMethod method);

}  // namespace binseg
