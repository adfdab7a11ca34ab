#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "binseg/convex_hull.h"
#include "binseg/stable_poses.h"
#include "binseg/types.h"

namespace binseg {

struct ModelEntry {
  std::string id;
  TriangleMesh mesh;
  ConvexHull hull;
  Vec3 center_of_mass;
  std::vector<StablePose> stable_poses;
  bool backing = false;
};

// Read-only, id-sorted collection of object models with precomputed hulls and
// resting poses.
class ModelDatabase {
 public:
  ModelDatabase() = default;

  // Loads `dir/models.json` if present: {"models": [{"id", "path",
  // "backing"?, "backing_thickness"?}]}; otherwise every .obj/.stl file in the
  // directory, keyed by file stem.
  static ModelDatabase loadDirectory(
      const std::filesystem::path& dir,
      PoseWeighting weighting = PoseWeighting::kFacetArea);

  // Preprocesses in-memory meshes. Throws DataError on duplicate ids.
  static ModelDatabase fromMeshes(
      std::vector<std::pair<std::string, TriangleMesh>> meshes,
      PoseWeighting weighting = PoseWeighting::kFacetArea);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const ModelEntry& operator[](std::size_t i) const { return *entries_[i]; }
  // nullptr when absent.
  const ModelEntry* find(const std::string& id) const;
  std::vector<std::string> ids() const;

  // Entries whose ids are listed; throws DataError for unknown ids.
  ModelDatabase subset(const std::vector<std::string>& ids) const;

 private:
  void sortAndCheck();

  std::vector<std::shared_ptr<const ModelEntry>> entries_;
};

ModelEntry preprocessModel(std::string id, TriangleMesh mesh,
                           PoseWeighting weighting = PoseWeighting::kFacetArea);

}  // namespace binseg
