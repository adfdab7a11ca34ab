#include "binseg/datasetio.h"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdlib>
#include <cstring>
#include <map>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <png.h>

namespace binseg {

// ---------------------------------------------------------------------------
// Depth PNG

namespace {

struct PngIo {
  std::string* out = nullptr;
  std::string_view in;
  std::size_t pos = 0;
  char error[256] = {};
};

void pngWrite(png_structp png, png_bytep data, png_size_t length) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  io->out->append(reinterpret_cast<const char*>(data), length);
}

void pngFlush(png_structp) {}

void pngRead(png_structp png, png_bytep data, png_size_t length) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  if (io->pos + length > io->in.size()) png_error(png, "truncated PNG");
  std::memcpy(data, io->in.data() + io->pos, length);
  io->pos += length;
}

void pngError(png_structp png, png_const_charp msg) {
  auto* io = static_cast<PngIo*>(png_get_error_ptr(png));
  std::snprintf(io->error, sizeof(io->error), "%s", msg);
  png_longjmp(png, 1);
}

void pngWarning(png_structp, png_const_charp) {}

// Only trivially destructible locals live between setjmp and longjmp.
bool encodePng(PngIo& io, const std::uint8_t* rows, png_uint_32 w, png_uint_32 h) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &io, pngError, pngWarning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &io, pngWrite, pngFlush);
  png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (png_uint_32 v = 0; v < h; ++v)
    png_write_row(png, rows + std::size_t(v) * w * 2);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

// Decodes into `levels` (row-major) after `header` reports the size; returns
// false with io.error set on failure.
bool decodePng(PngIo& io, std::vector<std::uint16_t>& levels, png_uint_32& w, png_uint_32& h) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &io, pngError, pngWarning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  std::uint8_t* row = nullptr;
  if (!info || setjmp(png_jmpbuf(png))) {
    std::free(row);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &io, pngRead);
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  if (png_get_bit_depth(png, info) != 16 || png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_interlace_type(png, info) != PNG_INTERLACE_NONE)
    png_error(png, "depth PNG must be 16-bit single-channel, non-interlaced");
  if (w > 16384 || h > 16384) png_error(png, "depth PNG too large");
  levels.resize(std::size_t(w) * h);
  row = static_cast<std::uint8_t*>(std::malloc(std::size_t(w) * 2 + 1));
  for (png_uint_32 v = 0; v < h; ++v) {
    png_read_row(png, row, nullptr);
    for (png_uint_32 u = 0; u < w; ++u)
      levels[std::size_t(v) * w + u] = std::uint16_t((unsigned(row[u * 2]) << 8) | row[u * 2 + 1]);
  }
  png_read_end(png, nullptr);
  std::free(row);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

std::string writeDepthPng(const DepthImage& img, double depth_scale) {
  if (!(depth_scale > 0)) throw ArgumentError("depth_scale must be > 0");
  const int w = img.width(), h = img.height();
  if (w == 0 || h == 0) throw ArgumentError("cannot encode an empty image");
  std::vector<std::uint8_t> rows(std::size_t(w) * h * 2);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const double d = img(u, v);
      const double level = std::round(d * depth_scale);
      if (!(level >= 0 && level <= 65535))
        throw DataError("depth " + std::to_string(d) + " m at pixel (" + std::to_string(u) + ", " +
                        std::to_string(v) + ") does not fit 16 bits at scale " +
                        std::to_string(depth_scale));
      const auto q = std::uint16_t(level);
      rows[(std::size_t(v) * w + u) * 2] = std::uint8_t(q >> 8);  // PNG is big-endian
      rows[(std::size_t(v) * w + u) * 2 + 1] = std::uint8_t(q & 0xff);
    }
  std::string out;
  PngIo io;
  io.out = &out;
  if (!encodePng(io, rows.data(), png_uint_32(w), png_uint_32(h)))
    throw DataError(std::string("png encode: ") + io.error);
  return out;
}

DepthImage readDepthPng(std::string_view bytes, double depth_scale) {
  if (!(depth_scale > 0)) throw ArgumentError("depth_scale must be > 0");
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8))
    throw DataError("not a PNG file");
  PngIo io;
  io.in = bytes;
  std::vector<std::uint16_t> levels;
  png_uint_32 w = 0, h = 0;
  if (!decodePng(io, levels, w, h)) throw DataError(std::string("png decode: ") + io.error);
  DepthImage img(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < levels.size(); ++i)
    img.data()[i] = levels[i] == 0 ? DepthImage::kInvalid : float(levels[i] / depth_scale);
  return img;
}

// ---------------------------------------------------------------------------
// JSON schema helpers

namespace {

using nlohmann::json;

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, path_.empty() ? "/" : path_);
  }

  Node at(const std::string& key) const {
    if (!j_.is_object()) fail("expected object");
    auto it = j_.find(key);
    if (it == j_.end()) Node(j_, path_ + "/" + key).fail("missing field");
    return Node(*it, path_ + "/" + key);
  }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "/" + std::to_string(i)); }

  std::size_t arraySize() const {
    if (!j_.is_array()) fail("expected array");
    return j_.size();
  }
  std::int64_t integer() const {
    if (!j_.is_number_integer()) fail("expected integer");
    return j_.get<std::int64_t>();
  }
  std::uint64_t unsignedInteger() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0))
      fail("expected non-negative integer");
    return j_.get<std::uint64_t>();
  }
  double number() const {
    if (!j_.is_number()) fail("expected number");
    return j_.get<double>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected string");
    return j_.get<std::string>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected boolean");
    return j_.get<bool>();
  }
  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

json cameraToJson(const CameraModel& c) {
  const Mat3& r = c.pose.rotation();
  const Vec3& t = c.pose.translation();
  return {{"intrinsics",
           {{"fx", c.intrinsics.fx}, {"fy", c.intrinsics.fy}, {"cx", c.intrinsics.cx},
            {"cy", c.intrinsics.cy}, {"width", c.intrinsics.width}, {"height", c.intrinsics.height}}},
          {"pose",
           {{"rotation", {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0), r(2, 1), r(2, 2)}},
            {"translation", {t.x(), t.y(), t.z()}}}}};
}

CameraModel cameraFromJson(const Node& n) {
  CameraModel c;
  const Node k = n.at("intrinsics");
  c.intrinsics.fx = k.at("fx").number();
  c.intrinsics.fy = k.at("fy").number();
  c.intrinsics.cx = k.at("cx").number();
  c.intrinsics.cy = k.at("cy").number();
  c.intrinsics.width = int(k.at("width").integer());
  c.intrinsics.height = int(k.at("height").integer());
  const Node pose = n.at("pose");
  const Node rot = pose.at("rotation");
  const Node tr = pose.at("translation");
  if (rot.arraySize() != 9) rot.fail("expected 9 numbers");
  if (tr.arraySize() != 3) tr.fail("expected 3 numbers");
  Mat3 r;
  for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = rot.at(std::size_t(i)).number();
  Vec3 t(tr.at(0).number(), tr.at(1).number(), tr.at(2).number());
  c.pose = RigidTransform(r, t);
  return c;
}

json rleToJson(const InstanceMask& m, bool compact) {
  json counts = compact ? json(encodeRleString(m.counts())) : json(m.counts());
  return {{"size", {m.height(), m.width()}}, {"counts", counts}};
}

InstanceMask rleFromJson(const Node& n) {
  const Node size = n.at("size");
  if (size.arraySize() != 2) size.fail("expected [height, width]");
  const std::int64_t h = size.at(0).integer(), w = size.at(1).integer();
  if (h < 0 || w < 0 || h > 65536 || w > 65536) size.fail("invalid mask size");
  const Node counts = n.at("counts");
  std::vector<std::uint32_t> runs;
  if (counts.raw().is_string()) {
    try {
      runs = decodeRleString(counts.string());
    } catch (const ParseError& e) {
      counts.fail(e.what());
    }
  } else {
    const std::size_t len = counts.arraySize();
    for (std::size_t i = 0; i < len; ++i) {
      const std::uint64_t v = counts.at(i).unsignedInteger();
      if (v > 0xffffffffULL) counts.at(i).fail("count out of range");
      runs.push_back(std::uint32_t(v));
    }
  }
  try {
    return InstanceMask(int(w), int(h), std::move(runs));
  } catch (const Error& e) {
    counts.fail(e.what());
  }
}

}  // namespace

void AnnotationSet::validate() const {
  std::set<std::int64_t> image_ids, instance_ids;
  for (const AnnotatedImage& img : images) {
    if (!image_ids.insert(img.id).second)
      throw DataError("duplicate image id " + std::to_string(img.id));
    for (const AnnotationInstance& inst : img.instances) {
      if (inst.mask.isEmpty())
        throw DataError("empty mask in image " + std::to_string(img.id));
      if (inst.mask.width() != img.width || inst.mask.height() != img.height)
        throw DataError("mask size differs from image " + std::to_string(img.id));
      if (!instance_ids.insert(inst.id).second)
        throw DataError("duplicate annotation id " + std::to_string(inst.id));
    }
  }
}

nlohmann::json annotationsToJson(const AnnotationSet& set) {
  json images = json::array();
  json annotations = json::array();
  for (const AnnotatedImage& img : set.images) {
    json ji{{"id", img.id}, {"file_name", img.file_name}, {"width", img.width}, {"height", img.height}};
    if (img.camera) ji["camera"] = cameraToJson(*img.camera);
    images.push_back(std::move(ji));
    for (const AnnotationInstance& inst : img.instances) {
      const BoundingBox b = inst.mask.bbox();
      json ja{{"id", inst.id},
              {"image_id", img.id},
              {"category_id", 1},
              {"segmentation", rleToJson(inst.mask, false)},
              {"area", inst.mask.area()},
              {"bbox", {b.x, b.y, b.w, b.h}},
              {"iscrowd", 0}};
      if (inst.object_index >= 0) ja["object_index"] = inst.object_index;
      if (!inst.model_id.empty()) ja["model_id"] = inst.model_id;
      annotations.push_back(std::move(ja));
    }
  }
  return {{"info", {{"description", "synthetic depth heap dataset"},
                    {"depth_scale", set.depth_scale},
                    {"split", set.split},
                    {"version", "1.0"}}},
          {"images", images},
          {"annotations", annotations},
          {"categories", json::array({{{"id", 1}, {"name", "object"}, {"supercategory", "object"}}})}};
}

AnnotationSet annotationsFromJson(const nlohmann::json& doc) {
  const Node root(doc, "");
  if (!doc.is_object()) root.fail("expected object");
  AnnotationSet set;
  if (root.has("info")) {
    const Node info = root.at("info");
    if (info.has("depth_scale")) set.depth_scale = info.at("depth_scale").number();
    if (info.has("split")) set.split = info.at("split").string();
  }
  const Node cats = root.at("categories");
  bool have_object = false;
  for (std::size_t i = 0; i < cats.arraySize(); ++i)
    if (cats.at(i).at("id").integer() == 1) have_object = true;
  if (!have_object) cats.fail("category id 1 missing");

  const Node images = root.at("images");
  std::map<std::int64_t, std::size_t> by_id;
  for (std::size_t i = 0; i < images.arraySize(); ++i) {
    const Node n = images.at(i);
    AnnotatedImage img;
    img.id = n.at("id").integer();
    img.file_name = n.at("file_name").string();
    img.width = int(n.at("width").integer());
    img.height = int(n.at("height").integer());
    if (img.width <= 0 || img.height <= 0) n.fail("image size must be positive");
    if (n.has("camera")) img.camera = cameraFromJson(n.at("camera"));
    if (!by_id.emplace(img.id, set.images.size()).second) n.at("id").fail("duplicate image id");
    set.images.push_back(std::move(img));
  }
  const Node anns = root.at("annotations");
  std::set<std::int64_t> ann_ids;
  for (std::size_t i = 0; i < anns.arraySize(); ++i) {
    const Node n = anns.at(i);
    AnnotationInstance inst;
    inst.id = n.at("id").integer();
    if (!ann_ids.insert(inst.id).second) n.at("id").fail("duplicate annotation id");
    const std::int64_t image_id = n.at("image_id").integer();
    auto it = by_id.find(image_id);
    if (it == by_id.end()) n.at("image_id").fail("unknown image id");
    if (n.at("category_id").integer() != 1) n.at("category_id").fail("expected category 1");
    if (n.has("iscrowd") && n.at("iscrowd").integer() != 0) n.at("iscrowd").fail("crowd regions unsupported");
    inst.mask = rleFromJson(n.at("segmentation"));
    AnnotatedImage& img = set.images[it->second];
    if (inst.mask.width() != img.width || inst.mask.height() != img.height)
      n.at("segmentation").fail("mask size differs from image size");
    if (inst.mask.isEmpty()) n.at("segmentation").fail("empty mask");
    if (n.at("area").unsignedInteger() != inst.mask.area()) n.at("area").fail("area does not match mask");
    const Node bbox = n.at("bbox");
    if (bbox.arraySize() != 4) bbox.fail("expected [x, y, w, h]");
    const BoundingBox b = inst.mask.bbox();
    const std::array<double, 4> expect{double(b.x), double(b.y), double(b.w), double(b.h)};
    for (std::size_t k = 0; k < 4; ++k)
      if (bbox.at(k).number() != expect[k]) bbox.fail("bbox does not match mask");
    if (n.has("object_index")) inst.object_index = int(n.at("object_index").integer());
    if (n.has("model_id")) inst.model_id = n.at("model_id").string();
    img.instances.push_back(std::move(inst));
  }
  return set;
}

std::string writeAnnotations(const AnnotationSet& set) {
  set.validate();
  return annotationsToJson(set).dump(1) + "\n";
}

AnnotationSet readAnnotations(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), "byte " + std::to_string(e.byte));
  }
  return annotationsFromJson(doc);
}

std::string writePredictions(const std::vector<Prediction>& preds) {
  json out = json::array();
  for (const Prediction& p : preds)
    out.push_back({{"image_id", p.image_id},
                   {"category_id", 1},
                   {"segmentation", rleToJson(p.mask, true)},
                   {"score", p.score}});
  return out.dump(1) + "\n";
}

std::vector<Prediction> readPredictions(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), "byte " + std::to_string(e.byte));
  }
  const Node root(doc, "");
  std::vector<Prediction> preds;
  for (std::size_t i = 0; i < root.arraySize(); ++i) {
    const Node n = root.at(i);
    Prediction p;
    p.image_id = n.at("image_id").integer();
    if (n.has("category_id") && n.at("category_id").integer() != 1)
      n.at("category_id").fail("expected category 1");
    p.mask = rleFromJson(n.at("segmentation"));
    p.score = n.at("score").number();
    if (!std::isfinite(p.score)) n.at("score").fail("score must be finite");
    if (p.mask.isEmpty()) n.at("segmentation").fail("empty mask");
    preds.push_back(std::move(p));
  }
  return preds;
}

// ---------------------------------------------------------------------------
// Manifest

nlohmann::json manifestToJson(const DatasetManifest& m) {
  return {{"name", m.name},
          {"depth_scale", m.depth_scale},
          {"width", m.width},
          {"height", m.height},
          {"split", m.split},
          {"master_seed", m.master_seed},
          {"config_hash", m.config_hash},
          {"num_images", m.num_images},
          {"num_instances", m.num_instances},
          {"object_ids", m.object_ids},
          {"complete", m.complete},
          {"layout",
           {{"depth_images", "depth_ims/NNNNNN.png"},
            {"annotations", "annotations.json"},
            {"config", "config.json"}}}};
}

DatasetManifest manifestFromJson(const nlohmann::json& doc) {
  const Node root(doc, "");
  DatasetManifest m;
  m.name = root.at("name").string();
  m.depth_scale = root.at("depth_scale").number();
  m.width = int(root.at("width").integer());
  m.height = int(root.at("height").integer());
  m.split = root.at("split").string();
  m.master_seed = root.at("master_seed").unsignedInteger();
  m.config_hash = root.at("config_hash").string();
  m.num_images = root.at("num_images").unsignedInteger();
  m.num_instances = root.at("num_instances").unsignedInteger();
  const Node ids = root.at("object_ids");
  for (std::size_t i = 0; i < ids.arraySize(); ++i) m.object_ids.push_back(ids.at(i).string());
  m.complete = root.at("complete").boolean();
  return m;
}

// ---------------------------------------------------------------------------
// Splits, padding, hashing

ObjectSplit splitObjects(std::vector<std::string> ids, double fraction, std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1)) throw ArgumentError("fraction must lie in (0, 1)");
  if (ids.size() < 2) throw ArgumentError("need at least two objects to split");
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const std::size_t n = ids.size();
  const auto n_train = std::clamp<std::size_t>(
      std::size_t(std::ceil(fraction * double(n) - 1e-9)), 1, n - 1);
  ObjectSplit split;
  split.train.assign(ids.begin(), ids.begin() + std::ptrdiff_t(n_train));
  split.val.assign(ids.begin() + std::ptrdiff_t(n_train), ids.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  return split;
}

DepthImage padImage(const DepthImage& img, int width, int height) {
  if (width < img.width() || height < img.height())
    throw ArgumentError("pad target smaller than source image");
  DepthImage out(width, height);
  out.array().topLeftCorner(img.height(), img.width()) = img.array();
  return out;
}

std::string fnv1aHex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string hashDirectory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir));
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const fs::path& f : files) {
    acc += f.generic_string();
    acc.push_back('\0');
    acc += fnv1aHex(readFile(dir / f));
    acc.push_back('\n');
  }
  return fnv1aHex(acc);
}

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeFile(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace binseg
