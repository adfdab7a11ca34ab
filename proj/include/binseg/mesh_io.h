#pragma once

#include <filesystem>
#include <string_view>

#include "binseg/types.h"

namespace binseg {

// ASCII Wavefront OBJ. Only `v` and `f` records are read; polygons are
// fan-triangulated, face tokens may carry /vt/vn suffixes and negative
// (relative) indices. Errors are ParseErrors located at "line N".
TriangleMesh loadObj(std::string_view text);

// Binary STL. Vertices are merged by exact bit equality of their float
// coordinates; stored facet normals are ignored. Errors are ParseErrors
// located at a byte offset.
TriangleMesh loadStl(std::string_view bytes);

// Dispatches on extension (.obj / .stl, case-insensitive).
TriangleMesh loadMeshFile(const std::filesystem::path& path);

// Serializers used by the procedural model corpus and tests.
std::string writeObj(const TriangleMesh& mesh);
std::string writeStl(const TriangleMesh& mesh);

}  // namespace binseg
