#include "binseg/pipeline.h"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace binseg {

namespace fs = std::filesystem;

SceneGenerator::SceneGenerator(const GenConfig& config, const RenderSettings& render,
                               const ModelDatabase& db)
    : config_(config), render_(render), db_(&db), catalog_(db, config) {
  config_.validate();
  render_.validate();
  if (db.empty()) throw DataError("model database is empty");
}

SceneResult SceneGenerator::generate(std::size_t index) const {
  const auto start = std::chrono::steady_clock::now();
  SceneResult r;
  r.index = index;
  const std::uint64_t seed = sceneSeed(config_.master_seed, index);
  r.state = sampleHeapState(seed, config_, *db_, &r.log);
  r.depth = renderDepth(r.state, catalog_, r.state.camera, render_);
  std::vector<DepthImage> isolated;
  isolated.reserve(r.state.foreground.size());
  for (std::size_t i = 0; i < r.state.foreground.size(); ++i)
    isolated.push_back(renderObjectIsolated(r.state, catalog_, r.state.camera, i, render_));
  r.masks = extractModalMasks(r.depth, isolated, render_.mask_threshold);
  if (observation_) {
    Rng rng(seed ^ 0x6f62736572766521ULL);
    observation_(r.depth, rng);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ModelDatabase selectSplit(const ModelDatabase& db, const SplitConfig& split) {
  if (split.name == "all") return db.subset(db.ids());
  const ObjectSplit s = splitObjects(db.ids(), split.fraction, split.seed);
  if (split.name == "train") return db.subset(s.train);
  if (split.name == "val") return db.subset(s.val);
  throw ArgumentError("unknown split: " + split.name);
}

nlohmann::json storedConfigJson(const RunConfig& config) {
  nlohmann::json j = toJson(config);
  j.erase("models_dir");
  j.erase("jobs");
  return j;
}

std::string depthFileName(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "depth_ims/%06zu.png", index);
  return buf;
}

AnnotatedImage annotateScene(const SceneResult& scene, std::int64_t first_instance_id) {
  AnnotatedImage img;
  img.id = static_cast<std::int64_t>(scene.index);
  img.file_name = depthFileName(scene.index);
  img.width = scene.depth.width();
  img.height = scene.depth.height();
  img.camera = scene.state.camera;
  std::int64_t id = first_instance_id;
  for (const ModalMask& m : scene.masks) {
    AnnotationInstance inst;
    inst.id = id++;
    inst.mask = m.mask;
    inst.object_index = static_cast<int>(m.object_index);
    inst.model_id = scene.state.foreground[m.object_index].mesh_id;
    img.instances.push_back(std::move(inst));
  }
  return img;
}

void parallelFor(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs < 1) throw ArgumentError("jobs must be >= 1");
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t failed_index = count;
  std::exception_ptr error;
  auto work = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_index) {
          failed_index = i;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

DatasetManifest writeDataset(const RunConfig& config, const ModelDatabase& db,
                             const fs::path& out, const DatasetWriteOptions& options) {
  config.validate();
  const ModelDatabase models = selectSplit(db, config.split);
  const RenderSettings render = config.renderSettings();
  SceneGenerator gen(config.generation, render, models);

  const nlohmann::json stored = storedConfigJson(config);
  const std::string stored_text = stored.dump(1) + "\n";

  DatasetManifest manifest;
  manifest.depth_scale = kDefaultDepthScale;
  manifest.width = config.generation.width;
  manifest.height = config.generation.height;
  manifest.split = config.split.name;
  manifest.master_seed = config.generation.master_seed;
  manifest.config_hash = fnv1aHex(stored_text);
  manifest.object_ids = models.ids();
  manifest.complete = false;

  fs::create_directories(out / "depth_ims");
  writeFile(out / "manifest.json", manifestToJson(manifest).dump(1) + "\n");
  writeFile(out / "config.json", stored_text);

  // Workers write their own PNG files and keep only the annotations.
  std::vector<AnnotatedImage> images(options.count);
  parallelFor(options.count, options.jobs, [&](std::size_t i) {
    SceneResult scene = gen.generate(i);
    writeFile(out / depthFileName(i), writeDepthPng(scene.depth, manifest.depth_scale));
    images[i] = annotateScene(scene, 0);
    if (options.on_scene) options.on_scene(scene);
  });

  AnnotationSet set;
  set.depth_scale = manifest.depth_scale;
  set.split = config.split.name;
  std::int64_t next_id = 1;
  for (auto& img : images) {
    for (auto& inst : img.instances) inst.id = next_id++;
    manifest.num_instances += img.instances.size();
  }
  set.images = std::move(images);
  manifest.num_images = set.images.size();
  writeFile(out / "annotations.json", writeAnnotations(set));

  manifest.complete = true;
  writeFile(out / "manifest.json", manifestToJson(manifest).dump(1) + "\n");
  return manifest;
}

LoadedDataset loadDataset(const fs::path& dir) {
  LoadedDataset d;
  const fs::path manifest_path = dir / "manifest.json";
  try {
    d.manifest = manifestFromJson(nlohmann::json::parse(readFile(manifest_path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), manifest_path.string());
  }
  if (!d.manifest.complete) throw DataError("dataset is incomplete: " + dir.string());
  const std::string config_text = readFile(dir / "config.json");
  if (fnv1aHex(config_text) != d.manifest.config_hash)
    throw DataError("config.json does not match the manifest hash");
  try {
    d.config = runConfigFromJson(nlohmann::json::parse(config_text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), (dir / "config.json").string());
  }
  d.annotations = readAnnotations(readFile(dir / "annotations.json"));
  if (d.annotations.images.size() != d.manifest.num_images)
    throw DataError("annotations and manifest disagree on the image count");
  return d;
}

DepthImage loadDepthImage(const fs::path& dir, const AnnotatedImage& image, double depth_scale) {
  DepthImage img = readDepthPng(readFile(dir / image.file_name), depth_scale);
  if (img.width() != image.width || img.height() != image.height)
    throw DataError("image size does not match annotations: " + image.file_name);
  return img;
}

}  // namespace binseg
