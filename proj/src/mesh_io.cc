#include "binseg/mesh_io.h"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace binseg {

namespace {

std::string lineLoc(std::size_t line) { return "line " + std::to_string(line); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> splitWs(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double parseDouble(std::string_view tok, std::size_t line) {
  // from_chars for double is available in libstdc++ 11.
  double value = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value))
    throw ParseError("malformed number '" + std::string(tok) + "'", lineLoc(line));
  return value;
}

std::uint32_t parseFaceIndex(std::string_view tok, std::size_t vertex_count,
                             std::size_t line) {
  const auto slash = tok.find('/');
  std::string_view head = tok.substr(0, slash);
  long long idx = 0;
  auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (head.empty() || ec != std::errc() || ptr != head.data() + head.size() || idx == 0)
    throw ParseError("malformed face index '" + std::string(tok) + "'", lineLoc(line));
  const long long n = static_cast<long long>(vertex_count);
  const long long resolved = idx > 0 ? idx - 1 : n + idx;
  if (resolved < 0 || resolved >= n)
    throw ParseError("face index " + std::to_string(idx) + " out of range (" +
                         std::to_string(vertex_count) + " vertices)",
                     lineLoc(line));
  return static_cast<std::uint32_t>(resolved);
}

}  // namespace

TriangleMesh loadObj(std::string_view text) {
  TriangleMesh mesh;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto tokens = splitWs(line);
    if (tokens[0] == "v") {
      if (tokens.size() < 4)
        throw ParseError("vertex needs 3 coordinates", lineLoc(line_no));
      mesh.vertices.emplace_back(parseDouble(tokens[1], line_no),
                                 parseDouble(tokens[2], line_no),
                                 parseDouble(tokens[3], line_no));
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4)
        throw ParseError("face needs at least 3 vertices", lineLoc(line_no));
      std::vector<std::uint32_t> idx;
      idx.reserve(tokens.size() - 1);
      for (std::size_t i = 1; i < tokens.size(); ++i)
        idx.push_back(parseFaceIndex(tokens[i], mesh.vertices.size(), line_no));
      for (std::size_t i = 1; i + 1 < idx.size(); ++i)
        mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
    if (end == text.size()) break;
  }
  mesh.dropDegenerate();
  return mesh;
}

namespace {

constexpr std::size_t kStlHeader = 80;
constexpr std::size_t kStlRecord = 50;

std::uint32_t readU32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  return v;
}

float readF32(const char* p) { return std::bit_cast<float>(readU32(p)); }

void writeU32(std::string& out, std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

}  // namespace

TriangleMesh loadStl(std::string_view bytes) {
  if (bytes.size() < kStlHeader + 4)
    throw ParseError("truncated STL header", "offset " + std::to_string(bytes.size()));
  const std::uint32_t count = readU32(bytes.data() + kStlHeader);
  const std::size_t expected = kStlHeader + 4 + std::size_t(count) * kStlRecord;
  if (bytes.size() < expected)
    throw ParseError("STL declares " + std::to_string(count) +
                         " triangles but holds " +
                         std::to_string((bytes.size() - kStlHeader - 4) / kStlRecord),
                     "offset " + std::to_string(bytes.size()));
  if (bytes.size() > expected)
    throw ParseError("STL has trailing bytes after " + std::to_string(count) +
                         " triangles",
                     "offset " + std::to_string(expected));

  TriangleMesh mesh;
  std::map<std::array<std::uint32_t, 3>, std::uint32_t> index;
  for (std::uint32_t t = 0; t < count; ++t) {
    const char* rec = bytes.data() + kStlHeader + 4 + std::size_t(t) * kStlRecord;
    std::array<std::uint32_t, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      const char* vp = rec + 12 + 12 * k;
      std::array<std::uint32_t, 3> key{readU32(vp), readU32(vp + 4), readU32(vp + 8)};
      const float x = readF32(vp), y = readF32(vp + 4), z = readF32(vp + 8);
      if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
        throw ParseError("non-finite vertex coordinate",
                         "offset " + std::to_string(vp - bytes.data()));
      auto [it, inserted] = index.try_emplace(key, std::uint32_t(mesh.vertices.size()));
      if (inserted) mesh.vertices.emplace_back(x, y, z);
      tri[k] = it->second;
    }
    mesh.triangles.push_back({tri[0], tri[1], tri[2]});
  }
  mesh.dropDegenerate();
  return mesh;
}

TriangleMesh loadMeshFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open mesh file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  try {
    TriangleMesh mesh;
    if (ext == ".obj") {
      mesh = loadObj(bytes);
    } else if (ext == ".stl") {
      mesh = loadStl(bytes);
    } else {
      throw DataError("unsupported mesh format " + ext);
    }
    mesh.name = path.stem().string();
    return mesh;
  } catch (const ParseError& e) {
    throw ParseError(e.what(), path.string());
  }
}

std::string writeObj(const TriangleMesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  if (!mesh.name.empty()) out << "o " << mesh.name << '\n';
  for (const Vec3& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Triangle& t : mesh.triangles)
    out << "f " << t.a + 1 << ' ' << t.b + 1 << ' ' << t.c + 1 << '\n';
  return out.str();
}

std::string writeStl(const TriangleMesh& mesh) {
  std::string out(kStlHeader, '\0');
  const std::string tag = "binary stl " + mesh.name;
  std::copy_n(tag.begin(), std::min(tag.size(), kStlHeader), out.begin());
  writeU32(out, std::uint32_t(mesh.triangles.size()));
  auto putF = [&](double v) { writeU32(out, std::bit_cast<std::uint32_t>(float(v))); };
  for (const Triangle& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t.a];
    const Vec3& b = mesh.vertices[t.b];
    const Vec3& c = mesh.vertices[t.c];
    Vec3 n = (b - a).cross(c - a);
    if (n.norm() > 0) n.normalize();
    for (int k = 0; k < 3; ++k) putF(n[k]);
    for (const Vec3* v : {&a, &b, &c})
      for (int k = 0; k < 3; ++k) putF((*v)[k]);
    out.append(2, '\0');
  }
  return out;
}

}  // namespace binseg
