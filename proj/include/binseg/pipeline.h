#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <vector>

#include "binseg/annotation.h"
#include "binseg/config.h"
#include "binseg/datasetio.h"
#include "binseg/heapgen.h"
#include "binseg/model_database.h"
#include "binseg/render.h"

namespace binseg {

struct SceneResult {
  std::size_t index = 0;
  SceneState state;
  DepthImage depth;
  std::vector<ModalMask> masks;
  HeapLog log;
  double seconds = 0;  // wall time of sampling, rendering and mask extraction
};

// Turns scene indices into rendered, labelled scenes. Scene i depends only
// on (config, master seed, i).
class SceneGenerator {
 public:
  SceneGenerator(const GenConfig& config, const RenderSettings& render,
                 const ModelDatabase& db);

  SceneResult generate(std::size_t index) const;

  // Applied to the full depth image after the masks are extracted.
  void setObservationModel(ObservationModel model) { observation_ = std::move(model); }

  const GenConfig& config() const { return config_; }
  const RenderSettings& renderSettings() const { return render_; }
  const MeshCatalog& catalog() const { return catalog_; }

 private:
  GenConfig config_;
  RenderSettings render_;
  const ModelDatabase* db_;
  MeshCatalog catalog_;
  ObservationModel observation_;
};

// Models used for a run: all of them, or one side of the object split.
ModelDatabase selectSplit(const ModelDatabase& db, const SplitConfig& split);

// The stored config.json document: the run config without machine-local
// fields (models_dir, jobs).
nlohmann::json storedConfigJson(const RunConfig& config);

AnnotatedImage annotateScene(const SceneResult& scene, std::int64_t first_instance_id);

std::string depthFileName(std::size_t index);

// Runs fn(0..count-1) on `jobs` threads. If calls throw, the exception of the
// lowest failing index is rethrown after all threads stop.
void parallelFor(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

struct DatasetWriteOptions {
  std::size_t count = 0;
  int jobs = 1;
  std::function<void(const SceneResult&)> on_scene;  // called from workers
};

// Writes depth_ims/NNNNNN.png, annotations.json and config.json, then the
// manifest as the commit point. A manifest with complete = false is present
// while the run is in progress and stays behind if it fails.
DatasetManifest writeDataset(const RunConfig& config, const ModelDatabase& db,
                             const std::filesystem::path& out,
                             const DatasetWriteOptions& options);

struct LoadedDataset {
  DatasetManifest manifest;
  AnnotationSet annotations;
  RunConfig config;
};

// Reads manifest, annotations and config; throws DataError for incomplete
// datasets.
LoadedDataset loadDataset(const std::filesystem::path& dir);
DepthImage loadDepthImage(const std::filesystem::path& dir, const AnnotatedImage& image,
                          double depth_scale);

}  // namespace binseg
