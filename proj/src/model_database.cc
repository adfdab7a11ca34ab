#include "binseg/model_database.h"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "binseg/mesh_io.h"

namespace binseg {

ModelEntry preprocessModel(std::string id, TriangleMesh mesh,
                           PoseWeighting weighting) {
  ModelEntry entry;
  entry.id = std::move(id);
  mesh.validate();
  if (mesh.triangles.empty()) throw DataError("model " + entry.id + " has no triangles");
  try {
    entry.hull = computeConvexHull(mesh.vertices);
    entry.center_of_mass = centerOfMass(mesh, entry.hull);
    entry.stable_poses = computeStablePoses(entry.hull, entry.center_of_mass, weighting);
  } catch (const DataError& e) {
    throw DataError("model " + entry.id + ": " + e.what());
  }
  entry.mesh = std::move(mesh);
  return entry;
}

ModelDatabase ModelDatabase::fromMeshes(
    std::vector<std::pair<std::string, TriangleMesh>> meshes,
    PoseWeighting weighting) {
  ModelDatabase db;
  for (auto& [id, mesh] : meshes)
    db.entries_.push_back(
        std::make_shared<const ModelEntry>(preprocessModel(id, std::move(mesh), weighting)));
  db.sortAndCheck();
  return db;
}

ModelDatabase ModelDatabase::loadDirectory(const std::filesystem::path& dir,
                                           PoseWeighting weighting) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("model directory not found: " + dir.string());
  ModelDatabase db;
  const fs::path manifest = dir / "models.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), manifest.string());
    }
    if (!doc.contains("models") || !doc["models"].is_array())
      throw ParseError("expected array", manifest.string() + ":/models");
    std::size_t i = 0;
    for (const auto& m : doc["models"]) {
      const std::string loc = manifest.string() + ":/models/" + std::to_string(i++);
      if (!m.is_object() || !m.contains("id") || !m["id"].is_string() ||
          !m.contains("path") || !m["path"].is_string())
        throw ParseError("model entry needs string id and path", loc);
      TriangleMesh mesh = loadMeshFile(dir / m["path"].get<std::string>());
      const bool backing = m.value("backing", false);
      if (backing) mesh = augmentWithBacking(mesh, m.value("backing_thickness", 0.005));
      ModelEntry entry = preprocessModel(m["id"].get<std::string>(), std::move(mesh), weighting);
      entry.backing = backing;
      db.entries_.push_back(std::make_shared<const ModelEntry>(std::move(entry)));
    }
  } else {
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir)) {
      std::string ext = f.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return char(std::tolower(c)); });
      if (f.is_regular_file() && (ext == ".obj" || ext == ".stl")) files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      db.entries_.push_back(std::make_shared<const ModelEntry>(
          preprocessModel(f.stem().string(), loadMeshFile(f), weighting)));
  }
  db.sortAndCheck();
  return db;
}

void ModelDatabase::sortAndCheck() {
  std::sort(entries_.begin(), entries_.end(),
            [](const auto& a, const auto& b) { return a->id < b->id; });
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i]->id == entries_[i - 1]->id)
      throw DataError("duplicate model id " + entries_[i]->id);
}

const ModelEntry* ModelDatabase::find(const std::string& id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const auto& e, const std::string& key) { return e->id < key; });
  return it != entries_.end() && (*it)->id == id ? it->get() : nullptr;
}

std::vector<std::string> ModelDatabase::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e->id);
  return out;
}

ModelDatabase ModelDatabase::subset(const std::vector<std::string>& ids) const {
  ModelDatabase db;
  for (const std::string& id : ids) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const auto& e, const std::string& key) { return e->id < key; });
    if (it == entries_.end() || (*it)->id != id) throw DataError("unknown model id " + id);
    db.entries_.push_back(*it);
  }
  db.sortAndCheck();
  return db;
}

}  // namespace binseg
