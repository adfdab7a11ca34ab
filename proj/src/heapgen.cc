#include "binseg/heapgen.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "binseg/primitives.h"

namespace binseg {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ArgumentError(what);
}

void requireInterval(const Interval& i, const char* what) {
  if (!(i.lo <= i.hi) || !std::isfinite(i.lo) || !std::isfinite(i.hi))
    throw ArgumentError(std::string(what) + ": interval must satisfy lo <= hi");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void GenConfig::validate() const {
  require(lambda_fg > 0, "lambda_fg must be > 0");
  require(min_fg > 0 && min_fg <= max_fg, "need 0 < min_fg <= max_fg");
  require(bin.width > 0 && bin.depth > 0 && bin.height > 0, "bin dimensions must be > 0");
  require(bin.wall_thickness > 0 && bin.floor_thickness > 0, "bin thickness must be > 0");
  require(table.width > 0 && table.depth > 0 && table.thickness > 0,
          "table dimensions must be > 0");
  requireInterval(radius, "radius");
  requireInterval(elevation, "elevation");
  requireInterval(azimuth, "azimuth");
  requireInterval(roll, "roll");
  requireInterval(fx, "fx");
  requireInterval(fy, "fy");
  requireInterval(cx, "cx");
  requireInterval(cy, "cy");
  require(radius.lo > 0, "radius must be > 0");
  require(elevation.lo > 0 && elevation.hi <= std::numbers::pi / 2 + 1e-12,
          "elevation must lie in (0, pi/2]");
  require(fx.lo > 0 && fy.lo > 0, "focal lengths must be > 0");
  require(width > 0 && height > 0 && width <= 4096 && height <= 4096,
          "render size must be in [1, 4096]");
  require(cx.lo >= 0 && cx.hi < width && cy.lo >= 0 && cy.hi < height,
          "principal point intervals must lie inside the image");
  require(mask_threshold > 0, "mask_threshold must be > 0");
  require(cell_size > 0, "cell_size must be > 0");
  require(placement_attempts > 0, "placement_attempts must be > 0");
}

std::uint64_t sceneSeed(std::uint64_t master_seed, std::uint64_t scene_index) {
  return splitmix64(master_seed ^ splitmix64(scene_index));
}

double uniform(Rng& rng, const Interval& interval) {
  const double u = std::generate_canonical<double, 64>(rng);
  return interval.lo + (interval.hi - interval.lo) * u;
}

int sampleObjectCount(Rng& rng, double lambda, int max, int min) {
  std::poisson_distribution<int> poisson(lambda);
  while (true) {
    const int m = poisson(rng);
    if (m >= min && m <= max) return m;
  }
}

HeightField::HeightField(const BinGeometry& bin, double cell_size) {
  nx_ = std::max(1, int(std::ceil(bin.width / cell_size - 1e-9)));
  ny_ = std::max(1, int(std::ceil(bin.depth / cell_size - 1e-9)));
  cell_x_ = bin.width / nx_;
  cell_y_ = bin.depth / ny_;
  x0_ = -bin.width / 2;
  y0_ = -bin.depth / 2;
  heights_.assign(std::size_t(nx_) * ny_, floor_);
}

void HeightField::reset() { std::fill(heights_.begin(), heights_.end(), floor_); }

namespace {

using Poly = std::vector<Vec3>;

// Keeps the part of `poly` with sign * p[axis] >= sign * bound.
void clip(Poly& poly, int axis, double bound, double sign, Poly& scratch) {
  scratch.clear();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = poly[i];
    const Vec3& b = poly[(i + 1) % n];
    const double da = sign * (a[axis] - bound);
    const double db = sign * (b[axis] - bound);
    if (da >= 0) scratch.push_back(a);
    if ((da >= 0) != (db >= 0)) {
      const double t = da / (da - db);
      Vec3 p = a + t * (b - a);
      p[axis] = bound;
      scratch.push_back(p);
    }
  }
  poly.swap(scratch);
}

}  // namespace

std::vector<FootprintCell> computeFootprint(const HeightField& field,
                                            const TriangleMesh& mesh,
                                            const RigidTransform& pose) {
  std::vector<Vec3> pts;
  pts.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) pts.push_back(pose * v);

  auto cellX = [&](double x) {
    return std::clamp(int(std::floor((x - field.x0()) / field.cellX())), 0, field.nx() - 1);
  };
  auto cellY = [&](double y) {
    return std::clamp(int(std::floor((y - field.y0()) / field.cellY())), 0, field.ny() - 1);
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> range(field.cellCount(), {inf, -inf});
  std::vector<std::size_t> touched;

  Poly poly, scratch;
  for (const Triangle& t : mesh.triangles) {
    const Vec3& a = pts[t.a];
    const Vec3& b = pts[t.b];
    const Vec3& c = pts[t.c];
    const double minx = std::min({a.x(), b.x(), c.x()}), maxx = std::max({a.x(), b.x(), c.x()});
    const double miny = std::min({a.y(), b.y(), c.y()}), maxy = std::max({a.y(), b.y(), c.y()});
    const double x_end = field.x0() + field.nx() * field.cellX();
    const double y_end = field.y0() + field.ny() * field.cellY();
    if (maxx < field.x0() || minx > x_end || maxy < field.y0() || miny > y_end) continue;
    for (int iy = cellY(miny); iy <= cellY(maxy); ++iy) {
      const double y0 = field.y0() + iy * field.cellY(), y1 = y0 + field.cellY();
      for (int ix = cellX(minx); ix <= cellX(maxx); ++ix) {
        const double x0 = field.x0() + ix * field.cellX(), x1 = x0 + field.cellX();
        poly.assign({a, b, c});
        clip(poly, 0, x0, 1.0, scratch);
        if (!poly.empty()) clip(poly, 0, x1, -1.0, scratch);
        if (!poly.empty()) clip(poly, 1, y0, 1.0, scratch);
        if (!poly.empty()) clip(poly, 1, y1, -1.0, scratch);
        if (poly.empty()) continue;
        const std::size_t cell = std::size_t(iy) * field.nx() + ix;
        auto& r = range[cell];
        if (r.first == inf) touched.push_back(cell);
        for (const Vec3& p : poly) {
          r.first = std::min(r.first, p.z());
          r.second = std::max(r.second, p.z());
        }
      }
    }
  }
  std::sort(touched.begin(), touched.end());
  std::vector<FootprintCell> out;
  out.reserve(touched.size());
  for (std::size_t cell : touched) out.push_back({cell, range[cell].first, range[cell].second});
  return out;
}

RigidTransform dropAt(HeightField& field, const TriangleMesh& mesh,
                      const Mat3& rotation, const Eigen::Vector2d& xy) {
  Eigen::AlignedBox3d box;
  for (const Vec3& v : mesh.vertices) box.extend(rotation * v);
  const Vec3 t(xy.x() - box.center().x(), xy.y() - box.center().y(), -box.min().z());
  const RigidTransform lifted(rotation, t);
  const auto footprint = computeFootprint(field, mesh, lifted);
  double rest = field.floor();
  for (const FootprintCell& c : footprint) rest = std::max(rest, field.at(c.cell) - c.z_lo);
  for (const FootprintCell& c : footprint)
    field.at(c.cell) = std::max(field.at(c.cell), rest + c.z_hi);
  return RigidTransform(rotation, t + Vec3(0, 0, rest));
}

RigidTransform settleObject(HeightField& field, const BinGeometry& bin,
                            const TriangleMesh& mesh,
                            const std::vector<StablePose>& poses, Rng& rng,
                            int attempts) {
  if (poses.empty()) throw PlacementError("placement failed: no stable poses");
  for (int attempt = 0; attempt < attempts; ++attempt) {
    double u = std::generate_canonical<double, 64>(rng);
    std::size_t k = 0;
    while (k + 1 < poses.size() && u >= poses[k].probability) u -= poses[k++].probability;
    const double yaw = uniform(rng, {0.0, 2 * std::numbers::pi});
    const Mat3 rotation = yawRotation(yaw) * poses[k].rotation;
    Eigen::AlignedBox3d box;
    for (const Vec3& v : mesh.vertices) box.extend(rotation * v);
    const double ex = box.sizes().x(), ey = box.sizes().y();
    if (ex > bin.width || ey > bin.depth) continue;
    const double x = uniform(rng, {-bin.width / 2 + ex / 2, bin.width / 2 - ex / 2});
    const double y = uniform(rng, {-bin.depth / 2 + ey / 2, bin.depth / 2 - ey / 2});
    return dropAt(field, mesh, rotation, {x, y});
  }
  throw PlacementError("placement failed");
}

HeightFieldSettler::HeightFieldSettler(const BinGeometry& bin, double cell_size,
                                       int attempts)
    : field_(bin, cell_size), bin_(bin), attempts_(attempts) {}

RigidTransform HeightFieldSettler::place(const ModelEntry& model, Rng& rng) {
  return settleObject(field_, bin_, model.mesh, model.stable_poses, rng, attempts_);
}

RigidTransform lookAtPose(double radius, double elevation, double azimuth,
                          double roll) {
  const Vec3 dir(std::cos(elevation) * std::cos(azimuth),
                 std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
  const Vec3 position = radius * dir;
  const Vec3 z = -dir;
  const Vec3 x(-std::sin(azimuth), std::cos(azimuth), 0.0);
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  r = r * Eigen::AngleAxisd(roll, Vec3::UnitZ()).toRotationMatrix();
  return RigidTransform(r, position);
}

CameraModel sampleCamera(Rng& rng, const GenConfig& config) {
  const double radius = uniform(rng, config.radius);
  const double elevation = uniform(rng, config.elevation);
  const double azimuth = uniform(rng, config.azimuth);
  const double roll = uniform(rng, config.roll);
  CameraModel camera;
  camera.intrinsics.fx = uniform(rng, config.fx);
  camera.intrinsics.fy = uniform(rng, config.fy);
  camera.intrinsics.cx = uniform(rng, config.cx);
  camera.intrinsics.cy = uniform(rng, config.cy);
  camera.intrinsics.width = config.width;
  camera.intrinsics.height = config.height;
  camera.pose = lookAtPose(radius, elevation, azimuth, roll);
  return camera;
}

TriangleMesh makeBinMesh(const BinGeometry& bin) {
  const double w = bin.width / 2, d = bin.depth / 2, t = bin.wall_thickness;
  const double h = bin.height;
  TriangleMesh mesh;
  mesh.name = kBinId;
  appendBox(mesh, Vec3(-w - t, -d - t, -bin.floor_thickness), Vec3(w + t, d + t, 0));
  appendBox(mesh, Vec3(-w - t, -d - t, 0), Vec3(-w, d + t, h));
  appendBox(mesh, Vec3(w, -d - t, 0), Vec3(w + t, d + t, h));
  appendBox(mesh, Vec3(-w, -d - t, 0), Vec3(w, -d, h));
  appendBox(mesh, Vec3(-w, d, 0), Vec3(w, d + t, h));
  return mesh;
}

TriangleMesh makeTableMesh(const BinGeometry& bin, const TableGeometry& table) {
  TriangleMesh mesh;
  mesh.name = kTableId;
  const double top = -bin.floor_thickness;
  appendBox(mesh, Vec3(-table.width / 2, -table.depth / 2, top - table.thickness),
            Vec3(table.width / 2, table.depth / 2, top));
  return mesh;
}

SceneState sampleHeapState(std::uint64_t seed, const GenConfig& config,
                           const ModelDatabase& db, HeapLog* log,
                           Settler* settler) {
  if (db.empty()) throw ArgumentError("model database is empty");
  HeapLog local;
  HeapLog& out = log ? *log : local;
  out = HeapLog{};
  HeightFieldSettler default_settler(config.bin, config.cell_size, config.placement_attempts);
  if (!settler) settler = &default_settler;

  Rng rng(seed);
  SceneState state;
  state.rng_seed = seed;
  state.camera = sampleCamera(rng, config);
  std::uniform_int_distribution<std::size_t> pick(0, db.size() - 1);
  constexpr int kMaxResamples = 1000;
  while (true) {
    state.foreground.clear();
    settler->reset();
    const int m = sampleObjectCount(rng, config.lambda_fg, config.max_fg, config.min_fg);
    out.sampled_count = m;
    out.placement_failures = 0;
    for (int i = 0; i < m; ++i) {
      const ModelEntry& model = db[pick(rng)];
      try {
        state.foreground.push_back(
            {model.id, settler->place(model, rng), ObjectKind::kForeground});
      } catch (const PlacementError& e) {
        ++out.placement_failures;
        out.warnings.push_back("skipped " + model.id + ": " + e.what());
      }
    }
    if (int(state.foreground.size()) >= config.min_fg) break;
    if (++out.resamples > kMaxResamples)
      throw DataError("could not place min_fg objects; models too large for the bin?");
  }
  state.background = {{kTableId, RigidTransform::Identity(), ObjectKind::kBackground},
                      {kBinId, RigidTransform::Identity(), ObjectKind::kBackground}};
  return state;
}

}  // namespace binseg
