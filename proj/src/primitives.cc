#include "binseg/primitives.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "binseg/mesh_io.h"

namespace binseg {

void appendBox(TriangleMesh& mesh, const Vec3& lo, const Vec3& hi) {
  const auto base = std::uint32_t(mesh.vertices.size());
  for (int i = 0; i < 8; ++i)
    mesh.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(),
                               i & 4 ? hi.z() : lo.z());
  static constexpr std::uint32_t kFaces[12][3] = {
      {0, 2, 1}, {1, 2, 3},  // z-
      {4, 5, 6}, {5, 7, 6},  // z+
      {0, 1, 4}, {1, 5, 4},  // y-
      {2, 6, 3}, {3, 6, 7},  // y+
      {0, 4, 2}, {2, 4, 6},  // x-
      {1, 3, 5}, {3, 7, 5},  // x+
  };
  for (const auto& f : kFaces) mesh.triangles.push_back({base + f[0], base + f[1], base + f[2]});
}

TriangleMesh makeBox(const Vec3& lo, const Vec3& hi) {
  TriangleMesh mesh;
  appendBox(mesh, lo, hi);
  return mesh;
}

TriangleMesh makeCylinder(double radius, double height, int segments) {
  TriangleMesh mesh;
  const double step = 2 * std::numbers::pi / segments;
  for (int i = 0; i < segments; ++i) {
    const double a = i * step;
    mesh.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
    mesh.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), height);
  }
  const auto bottom = std::uint32_t(mesh.vertices.size());
  mesh.vertices.emplace_back(0, 0, 0);
  mesh.vertices.emplace_back(0, 0, height);
  const std::uint32_t top = bottom + 1;
  for (int i = 0; i < segments; ++i) {
    const auto b0 = std::uint32_t(2 * i), t0 = b0 + 1;
    const auto b1 = std::uint32_t(2 * ((i + 1) % segments)), t1 = b1 + 1;
    mesh.triangles.push_back({b0, b1, t1});
    mesh.triangles.push_back({b0, t1, t0});
    mesh.triangles.push_back({bottom, b1, b0});
    mesh.triangles.push_back({top, t0, t1});
  }
  return mesh;
}

TriangleMesh makeCone(double radius, double height, int segments) {
  TriangleMesh mesh;
  const double step = 2 * std::numbers::pi / segments;
  for (int i = 0; i < segments; ++i)
    mesh.vertices.emplace_back(radius * std::cos(i * step), radius * std::sin(i * step), 0.0);
  const auto center = std::uint32_t(mesh.vertices.size());
  mesh.vertices.emplace_back(0, 0, 0);
  mesh.vertices.emplace_back(0, 0, height);
  const std::uint32_t apex = center + 1;
  for (int i = 0; i < segments; ++i) {
    const auto a = std::uint32_t(i), b = std::uint32_t((i + 1) % segments);
    mesh.triangles.push_back({center, b, a});
    mesh.triangles.push_back({a, b, apex});
  }
  return mesh;
}

TriangleMesh makeSphere(double radius, int rings, int segments) {
  TriangleMesh mesh;
  mesh.vertices.emplace_back(0, 0, -radius);
  for (int r = 1; r < rings; ++r) {
    const double phi = std::numbers::pi * r / rings - std::numbers::pi / 2;
    for (int s = 0; s < segments; ++s) {
      const double th = 2 * std::numbers::pi * s / segments;
      mesh.vertices.emplace_back(radius * std::cos(phi) * std::cos(th),
                                 radius * std::cos(phi) * std::sin(th),
                                 radius * std::sin(phi));
    }
  }
  mesh.vertices.emplace_back(0, 0, radius);
  const auto north = std::uint32_t(mesh.vertices.size() - 1);
  auto ring = [&](int r, int s) { return std::uint32_t(1 + (r - 1) * segments + (s % segments)); };
  for (int s = 0; s < segments; ++s) {
    mesh.triangles.push_back({0, ring(1, s + 1), ring(1, s)});
    mesh.triangles.push_back({north, ring(rings - 1, s), ring(rings - 1, s + 1)});
  }
  for (int r = 1; r + 1 < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      mesh.triangles.push_back({ring(r, s), ring(r, s + 1), ring(r + 1, s + 1)});
      mesh.triangles.push_back({ring(r, s), ring(r + 1, s + 1), ring(r + 1, s)});
    }
  }
  return mesh;
}

TriangleMesh makeWedge(double a, double b, double length) {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {a, 0, 0}, {0, 0, b}, {0, length, 0}, {a, length, 0}, {0, length, b}};
  mesh.triangles = {{0, 1, 2}, {3, 5, 4}, {0, 3, 4}, {0, 4, 1},
                    {0, 2, 5}, {0, 5, 3}, {1, 4, 5}, {1, 5, 2}};
  return mesh;
}

TriangleMesh makeRegularTetrahedron(double edge) {
  const double s = edge / (2 * std::numbers::sqrt2);
  TriangleMesh mesh;
  mesh.vertices = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
  mesh.triangles = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return mesh;
}

void writeModelCorpus(const std::filesystem::path& dir, int count,
                      std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 64>(rng);
  };
  nlohmann::json models = nlohmann::json::array();
  for (int i = 0; i < count; ++i) {
    const int kind = int(rng() % 6);
    TriangleMesh mesh;
    std::string stem;
    switch (kind) {
      case 0: {
        const Vec3 d(uni(0.04, 0.14), uni(0.03, 0.11), uni(0.02, 0.09));
        mesh = makeBox(-d / 2, d / 2);
        stem = "box";
        break;
      }
      case 1:
        mesh = makeCylinder(uni(0.02, 0.05), uni(0.04, 0.14), 16 + int(rng() % 16));
        stem = "cylinder";
        break;
      case 2:
        mesh = makeCone(uni(0.025, 0.06), uni(0.04, 0.1), 16 + int(rng() % 16));
        stem = "cone";
        break;
      case 3:
        mesh = makeSphere(uni(0.02, 0.05), 8 + int(rng() % 6), 12 + int(rng() % 8));
        stem = "sphere";
        break;
      case 4:
        mesh = makeWedge(uni(0.04, 0.11), uni(0.03, 0.08), uni(0.04, 0.11));
        stem = "wedge";
        break;
      default: {
        const double a = uni(0.06, 0.13), b = uni(0.03, 0.08), t = uni(0.015, 0.04);
        const double h = uni(0.02, 0.06);
        appendBox(mesh, Vec3(0, 0, 0), Vec3(a, t, h));
        appendBox(mesh, Vec3(0, t, 0), Vec3(t, t + b, h));
        stem = "lblock";
        break;
      }
    }
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%05d", stem.c_str(), i);
    mesh.name = id;
    const bool as_stl = rng() % 3 == 0;
    const std::string file = std::string(id) + (as_stl ? ".stl" : ".obj");
    std::ofstream out(dir / file, std::ios::binary);
    const std::string bytes = as_stl ? writeStl(mesh) : writeObj(mesh);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    nlohmann::json entry{{"id", id}, {"path", file}};
    if (rng() % 5 == 0) {
      entry["backing"] = true;
      entry["backing_thickness"] = 0.005;
    }
    models.push_back(entry);
  }
  std::ofstream manifest(dir / "models.json");
  manifest << nlohmann::json{{"models", models}}.dump(2) << '\n';
}

}  // namespace binseg
