#include "binseg/render.h"

#include <algorithm>
#include <array>
#include <cmath>

namespace binseg {

void RenderSettings::validate() const {
  if (!(near > 0 && near < far)) throw ArgumentError("need 0 < near < far");
  if (!(mask_threshold > 0)) throw ArgumentError("mask_threshold must be > 0");
}

MeshCatalog::MeshCatalog(const ModelDatabase& db, const GenConfig& config) : db_(&db) {
  background_.emplace(kBinId, makeBinMesh(config.bin));
  background_.emplace(kTableId, makeTableMesh(config.bin, config.table));
}

const TriangleMesh& MeshCatalog::mesh(const std::string& id) const {
  if (auto it = background_.find(id); it != background_.end()) return it->second;
  if (const ModelEntry* e = db_->find(id)) return e->mesh;
  throw DataError("unknown mesh id " + id);
}

namespace {

class Rasterizer {
 public:
  Rasterizer(const CameraModel& camera, const RenderSettings& settings)
      : k_(camera.intrinsics),
        settings_(settings),
        image_(camera.intrinsics.width, camera.intrinsics.height) {}

  // Triangle in camera coordinates.
  void draw(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double near = settings_.near;
    if (a.z() >= near && b.z() >= near && c.z() >= near) {
      drawClipped(a, b, c);
      return;
    }
    if (a.z() < near && b.z() < near && c.z() < near) return;
    // Clip against the near plane; at most a quad remains.
    std::array<Vec3, 3> in{a, b, c};
    std::array<Vec3, 4> out;
    int n = 0;
    for (int i = 0; i < 3; ++i) {
      const Vec3& p = in[i];
      const Vec3& q = in[(i + 1) % 3];
      const bool pin = p.z() >= near, qin = q.z() >= near;
      if (pin) out[n++] = p;
      if (pin != qin) {
        const double t = (near - p.z()) / (q.z() - p.z());
        Vec3 r = p + t * (q - p);
        r.z() = near;
        out[n++] = r;
      }
    }
    for (int i = 1; i + 1 < n; ++i) drawClipped(out[0], out[i], out[i + 1]);
  }

  DepthImage take() { return std::move(image_); }

 private:
  struct ScreenVertex {
    double x, y, inv_z;
  };

  ScreenVertex toScreen(const Vec3& p) const {
    return {k_.fx * p.x() / p.z() + k_.cx, k_.fy * p.y() / p.z() + k_.cy, 1.0 / p.z()};
  }

  static double orient(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
  }

  // Edge a->b owns the pixel centers lying exactly on it under this rule;
  // the same edge traversed b->a does not, so shared edges are drawn once.
  static bool ownsEdge(const ScreenVertex& a, const ScreenVertex& b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    return dy > 0 || (dy == 0 && dx < 0);
  }

  void drawClipped(const Vec3& pa, const Vec3& pb, const Vec3& pc) {
    ScreenVertex a = toScreen(pa), b = toScreen(pb), c = toScreen(pc);
    double area = orient(a, b, c.x, c.y);
    if (area == 0 || !std::isfinite(area)) return;
    if (area < 0) {
      std::swap(b, c);
      area = -area;
    }
    const int w = image_.width(), h = image_.height();
    const double minx = std::min({a.x, b.x, c.x}), maxx = std::max({a.x, b.x, c.x});
    const double miny = std::min({a.y, b.y, c.y}), maxy = std::max({a.y, b.y, c.y});
    const int u0 = std::max(0, int(std::ceil(minx - 0.5)));
    const int u1 = std::min(w - 1, int(std::floor(maxx - 0.5)));
    const int v0 = std::max(0, int(std::ceil(miny - 0.5)));
    const int v1 = std::min(h - 1, int(std::floor(maxy - 0.5)));
    if (u0 > u1 || v0 > v1) return;
    const bool own_bc = ownsEdge(b, c), own_ca = ownsEdge(c, a), own_ab = ownsEdge(a, b);
    const double inv_area = 1.0 / area;
    const float near = float(settings_.near), far = float(settings_.far);
    float* data = image_.data();
    for (int v = v0; v <= v1; ++v) {
      const double py = v + 0.5;
      for (int u = u0; u <= u1; ++u) {
        const double px = u + 0.5;
        const double w0 = orient(b, c, px, py);
        const double w1 = orient(c, a, px, py);
        const double w2 = orient(a, b, px, py);
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        if ((w0 == 0 && !own_bc) || (w1 == 0 && !own_ca) || (w2 == 0 && !own_ab)) continue;
        const double inv_z = (w0 * a.inv_z + w1 * b.inv_z + w2 * c.inv_z) * inv_area;
        const float z = float(1.0 / inv_z);
        if (!(z >= near && z <= far)) continue;
        float& dst = data[std::size_t(v) * w + u];
        if (dst == DepthImage::kInvalid || z < dst) dst = z;
      }
    }
  }

  const CameraIntrinsics& k_;
  const RenderSettings& settings_;
  DepthImage image_;
};

}  // namespace

DepthImage renderMeshes(std::span<const PosedMesh> meshes,
                        const CameraModel& camera,
                        const RenderSettings& settings) {
  const RigidTransform world_to_cam = camera.pose.inverse();
  Rasterizer raster(camera, settings);
  std::vector<Vec3> cam;
  for (const PosedMesh& pm : meshes) {
    const RigidTransform to_cam = world_to_cam * pm.pose;
    cam.clear();
    cam.reserve(pm.mesh->vertices.size());
    for (const Vec3& v : pm.mesh->vertices) cam.push_back(to_cam * v);
    for (const Triangle& t : pm.mesh->triangles) raster.draw(cam[t.a], cam[t.b], cam[t.c]);
  }
  return raster.take();
}

DepthImage renderDepth(const SceneState& scene, const MeshCatalog& catalog,
                       const CameraModel& camera, const RenderSettings& settings) {
  std::vector<PosedMesh> meshes;
  for (const auto* group : {&scene.background, &scene.foreground})
    for (const ObjectInstance& obj : *group)
      meshes.push_back({&catalog.mesh(obj.mesh_id), obj.pose});
  return renderMeshes(meshes, camera, settings);
}

DepthImage renderObjectIsolated(const SceneState& scene,
                                const MeshCatalog& catalog,
                                const CameraModel& camera, std::size_t index,
                                const RenderSettings& settings) {
  if (index >= scene.foreground.size())
    throw ArgumentError("foreground index " + std::to_string(index) + " out of range");
  const ObjectInstance& obj = scene.foreground[index];
  const PosedMesh pm{&catalog.mesh(obj.mesh_id), obj.pose};
  return renderMeshes(std::span(&pm, 1), camera, settings);
}

DepthImage renderEmptyBin(const GenConfig& config, const CameraModel& camera,
                          const RenderSettings& settings) {
  const TriangleMesh table = makeTableMesh(config.bin, config.table);
  const TriangleMesh bin = makeBinMesh(config.bin);
  const std::array<PosedMesh, 2> meshes{PosedMesh{&table, RigidTransform::Identity()},
                                        PosedMesh{&bin, RigidTransform::Identity()}};
  return renderMeshes(meshes, camera, settings);
}

std::vector<ModalMask> extractModalMasks(const DepthImage& full,
                                         std::span<const DepthImage> isolated,
                                         double threshold) {
  if (!(threshold > 0)) throw ArgumentError("mask threshold must be > 0");
  for (const DepthImage& img : isolated)
    if (img.width() != full.width() || img.height() != full.height())
      throw ArgumentError("isolated render dimension mismatch");
  const int w = full.width(), h = full.height();
  std::vector<Bitmap> bitmaps(isolated.size(), Bitmap::Zero(h, w));
  std::vector<std::uint64_t> counts(isolated.size(), 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const float d = full(u, v);
      if (d <= 0) continue;
      int owner = -1;
      float best = 0;
      for (std::size_t i = 0; i < isolated.size(); ++i) {
        const float di = isolated[i](u, v);
        if (di <= 0 || std::abs(double(di) - double(d)) > threshold) continue;
        if (owner < 0 || di < best) {
          owner = int(i);
          best = di;
        }
      }
      if (owner >= 0) {
        bitmaps[owner](v, u) = 1;
        ++counts[owner];
      }
    }
  }
  std::vector<ModalMask> out;
  for (std::size_t i = 0; i < bitmaps.size(); ++i)
    if (counts[i] > 0) out.push_back({i, InstanceMask::fromBitmap(bitmaps[i])});
  return out;
}

}  // namespace binseg
