#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "binseg/heapgen.h"
#include "binseg/mask.h"
#include "binseg/model_database.h"
#include "binseg/types.h"

namespace binseg {

struct RenderSettings {
  double near = 0.01;
  double far = 10.0;
  double mask_threshold = 1e-4;

  void validate() const;
};

struct PosedMesh {
  const TriangleMesh* mesh;
  RigidTransform pose;  // object-to-world
};

// Resolves scene mesh ids: model ids from the database plus the table and
// bin built from the generation config.
class MeshCatalog {
 public:
  MeshCatalog(const ModelDatabase& db, const GenConfig& config);

  const TriangleMesh& mesh(const std::string& id) const;

 private:
  const ModelDatabase* db_;
  std::map<std::string, TriangleMesh> background_;
};

// Z-buffer rasterization of the given meshes. Each pixel holds the smallest
// camera-frame z over all triangles hit by its center ray (u + 0.5, v + 0.5)
// within [near, far], or 0. Top-left fill rule, perspective-correct depth,
// no back-face culling.
DepthImage renderMeshes(std::span<const PosedMesh> meshes,
                        const CameraModel& camera,
                        const RenderSettings& settings);

// All foreground and background objects of the scene.
DepthImage renderDepth(const SceneState& scene, const MeshCatalog& catalog,
                       const CameraModel& camera, const RenderSettings& settings);

// Foreground object `index` alone. Throws ArgumentError when out of range.
DepthImage renderObjectIsolated(const SceneState& scene,
                                const MeshCatalog& catalog,
                                const CameraModel& camera, std::size_t index,
                                const RenderSettings& settings);

// Table and bin only.
DepthImage renderEmptyBin(const GenConfig& config, const CameraModel& camera,
                          const RenderSettings& settings);

struct ModalMask {
  std::size_t object_index;
  InstanceMask mask;
};

// Visible-pixel masks: pixel p belongs to object i when both the full and
// the isolated render are valid at p and differ by at most `threshold`.
// Pixels claimed by several objects go to the nearest isolated depth (ties to
// the lower index). Objects with no pixels are omitted. Throws
// ArgumentError on dimension mismatch.
std::vector<ModalMask> extractModalMasks(const DepthImage& full,
                                         std::span<const DepthImage> isolated,
                                         double threshold);

// Observation model applied after rendering; identity by default.
using ObservationModel = std::function<void(DepthImage&, Rng&)>;

}  // namespace binseg
