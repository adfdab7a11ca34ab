#include "binseg/config.h"

#include <set>

#include "binseg/datasetio.h"

namespace binseg {

using nlohmann::json;

namespace {

// Reads optional fields of one JSON object, remembering which keys were
// consumed so leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError("expected object", path_.empty() ? "/" : path_);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    const std::string loc = path_ + "/" + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ParseError("expected boolean", loc);
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ParseError("expected integer", loc);
      if constexpr (std::is_unsigned_v<T>)
        if (!it->is_number_unsigned() && it->get<long long>() < 0)
          throw ParseError("expected non-negative integer", loc);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ParseError("expected number", loc);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ParseError("expected string", loc);
    }
    out = it->get<T>();
  }

  void read(const std::string& key, Interval& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    const std::string loc = path_ + "/" + key;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
      throw ParseError("expected [lo, hi]", loc);
    out = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  }

  template <typename F>
  void nested(const std::string& key, F&& f) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    Section s(*it, path_ + "/" + key);
    f(s);
    s.finish();
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const std::string& path() const { return path_; }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw ParseError("unknown key", path_ + "/" + key);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json interval(const Interval& i) { return json::array({i.lo, i.hi}); }

void readGen(Section& s, GenConfig& c) {
  s.read("lambda_fg", c.lambda_fg);
  s.read("max_fg", c.max_fg);
  s.read("min_fg", c.min_fg);
  s.nested("bin", [&](Section& b) {
    b.read("width", c.bin.width);
    b.read("depth", c.bin.depth);
    b.read("height", c.bin.height);
    b.read("wall_thickness", c.bin.wall_thickness);
    b.read("floor_thickness", c.bin.floor_thickness);
  });
  s.nested("table", [&](Section& t) {
    t.read("width", c.table.width);
    t.read("depth", c.table.depth);
    t.read("thickness", c.table.thickness);
  });
  s.read("radius", c.radius);
  s.read("elevation", c.elevation);
  s.read("azimuth", c.azimuth);
  s.read("roll", c.roll);
  s.read("fx", c.fx);
  s.read("fy", c.fy);
  s.read("cx", c.cx);
  s.read("cy", c.cy);
  s.read("width", c.width);
  s.read("height", c.height);
  s.read("mask_threshold", c.mask_threshold);
  s.read("master_seed", c.master_seed);
  s.read("cell_size", c.cell_size);
  s.read("placement_attempts", c.placement_attempts);
  std::string weighting = c.pose_weighting == PoseWeighting::kUniform ? "uniform" : "area";
  s.read("pose_weighting", weighting);
  if (weighting == "area") {
    c.pose_weighting = PoseWeighting::kFacetArea;
  } else if (weighting == "uniform") {
    c.pose_weighting = PoseWeighting::kUniform;
  } else {
    throw ParseError("expected \"area\" or \"uniform\"", s.path() + "/pose_weighting");
  }
}

void readRender(Section& s, RenderSettings& r) {
  s.read("near", r.near);
  s.read("far", r.far);
}

void readSeg(Section& s, SegParams& p) {
  s.nested("euclidean", [&](Section& e) {
    e.read("radius", p.euclidean.radius);
    e.read("min_cluster", p.euclidean.min_cluster);
    e.read("max_cluster", p.euclidean.max_cluster);
  });
  s.nested("region_growing", [&](Section& r) {
    r.read("k_neighbors", p.region_growing.k_neighbors);
    r.read("angle_threshold", p.region_growing.angle_threshold);
    r.read("curvature_threshold", p.region_growing.curvature_threshold);
    r.read("min_cluster", p.region_growing.min_cluster);
  });
  s.read("background_delta", p.background_delta);
}

}  // namespace

json toJson(const GenConfig& c) {
  return {{"lambda_fg", c.lambda_fg},
          {"max_fg", c.max_fg},
          {"min_fg", c.min_fg},
          {"bin",
           {{"width", c.bin.width},
            {"depth", c.bin.depth},
            {"height", c.bin.height},
            {"wall_thickness", c.bin.wall_thickness},
            {"floor_thickness", c.bin.floor_thickness}}},
          {"table", {{"width", c.table.width}, {"depth", c.table.depth}, {"thickness", c.table.thickness}}},
          {"radius", interval(c.radius)},
          {"elevation", interval(c.elevation)},
          {"azimuth", interval(c.azimuth)},
          {"roll", interval(c.roll)},
          {"fx", interval(c.fx)},
          {"fy", interval(c.fy)},
          {"cx", interval(c.cx)},
          {"cy", interval(c.cy)},
          {"width", c.width},
          {"height", c.height},
          {"mask_threshold", c.mask_threshold},
          {"master_seed", c.master_seed},
          {"cell_size", c.cell_size},
          {"placement_attempts", c.placement_attempts},
          {"pose_weighting", c.pose_weighting == PoseWeighting::kUniform ? "uniform" : "area"}};
}

json toJson(const RenderSettings& s) { return {{"near", s.near}, {"far", s.far}}; }

json toJson(const SegParams& p) {
  return {{"euclidean",
           {{"radius", p.euclidean.radius},
            {"min_cluster", p.euclidean.min_cluster},
            {"max_cluster", p.euclidean.max_cluster}}},
          {"region_growing",
           {{"k_neighbors", p.region_growing.k_neighbors},
            {"angle_threshold", p.region_growing.angle_threshold},
            {"curvature_threshold", p.region_growing.curvature_threshold},
            {"min_cluster", p.region_growing.min_cluster}}},
          {"background_delta", p.background_delta}};
}

json toJson(const RunConfig& c) {
  return {{"generation", toJson(c.generation)},
          {"render", toJson(c.render)},
          {"segmentation", toJson(c.segmentation)},
          {"split", {{"name", c.split.name}, {"fraction", c.split.fraction}, {"seed", c.split.seed}}},
          {"models_dir", c.models_dir.generic_string()},
          {"jobs", c.jobs}};
}

GenConfig genConfigFromJson(const json& j, GenConfig base) {
  Section s(j, "");
  readGen(s, base);
  s.finish();
  return base;
}

RenderSettings renderSettingsFromJson(const json& j, RenderSettings base) {
  Section s(j, "");
  readRender(s, base);
  s.finish();
  return base;
}

SegParams segParamsFromJson(const json& j, SegParams base) {
  Section s(j, "");
  readSeg(s, base);
  s.finish();
  return base;
}

RunConfig runConfigFromJson(const json& j, RunConfig base) {
  Section s(j, "");
  s.nested("generation", [&](Section& g) { readGen(g, base.generation); });
  s.nested("render", [&](Section& r) { readRender(r, base.render); });
  s.nested("segmentation", [&](Section& p) { readSeg(p, base.segmentation); });
  s.nested("split", [&](Section& p) {
    p.read("name", base.split.name);
    p.read("fraction", base.split.fraction);
    p.read("seed", base.split.seed);
  });
  std::string models = base.models_dir.generic_string();
  s.read("models_dir", models);
  base.models_dir = models;
  s.read("jobs", base.jobs);
  s.finish();
  base.render.mask_threshold = base.generation.mask_threshold;
  return base;
}

RenderSettings RunConfig::renderSettings() const {
  RenderSettings r = render;
  r.mask_threshold = generation.mask_threshold;
  return r;
}

void RunConfig::validate() const {
  generation.validate();
  renderSettings().validate();
  segmentation.validate();
  if (jobs < 1) throw ArgumentError("jobs must be >= 1");
  if (split.name != "all" && split.name != "train" && split.name != "val")
    throw ArgumentError("split.name must be all, train or val");
  if (!(split.fraction > 0 && split.fraction < 1)) throw ArgumentError("split.fraction must lie in (0, 1)");
  if (render.far * kDefaultDepthScale > 65535)
    throw ArgumentError("render.far exceeds the 16-bit depth range at the default scale");
}

RunConfig loadRunConfig(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(readFile(path));
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), path.string());
  }
  RunConfig c;
  try {
    c = runConfigFromJson(doc);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), path.string());
  }
  if (!c.models_dir.empty() && c.models_dir.is_relative())
    c.models_dir = path.parent_path() / c.models_dir;
  return c;
}

std::string configHash(const RunConfig& c) {
  json j = toJson(c);
  j.erase("models_dir");
  j.erase("jobs");
  return fnv1aHex(j.dump());
}

}  // namespace binseg
