#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "binseg/heapgen.h"
#include "binseg/render.h"
#include "binseg/segbase.h"

namespace binseg {

struct SplitConfig {
  std::string name = "all";  // all | train | val
  double fraction = 0.8;
  std::uint64_t seed = 0;
};

// Everything a run needs. JSON sections: "generation", "render",
// "segmentation", "split", plus "models_dir" and "jobs". Missing keys keep
// their defaults; unknown keys are rejected.
struct RunConfig {
  GenConfig generation;
  // far is capped so that far * depth_scale fits 16-bit PNG levels.
  RenderSettings render{.near = 0.01, .far = 6.5};
  SegParams segmentation;
  SplitConfig split;
  std::filesystem::path models_dir;  // resolved against the config file
  int jobs = 1;

  RenderSettings renderSettings() const;
  void validate() const;
};

nlohmann::json toJson(const GenConfig& c);
nlohmann::json toJson(const RenderSettings& s);
nlohmann::json toJson(const SegParams& p);
nlohmann::json toJson(const RunConfig& c);

// Each overlays the document onto `base`; ParseError on bad types or
// unknown keys, located by JSON pointer.
GenConfig genConfigFromJson(const nlohmann::json& j, GenConfig base = {});
RenderSettings renderSettingsFromJson(const nlohmann::json& j, RenderSettings base = {});
SegParams segParamsFromJson(const nlohmann::json& j, SegParams base = {});
RunConfig runConfigFromJson(const nlohmann::json& j, RunConfig base = {});

// Reads a RunConfig file; a relative models_dir is resolved against the
// file's directory.
RunConfig loadRunConfig(const std::filesystem::path& path);

// Hash of the canonical JSON dump of the generation-relevant sections.
std::string configHash(const RunConfig& c);

}  // namespace binseg
