#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "binseg/annotation.h"
#include "binseg/cocoeval.h"
#include "binseg/types.h"

namespace binseg {

inline constexpr double kDefaultDepthScale = 10000.0;  // levels per meter

// 16-bit grayscale PNG; level = round(depth * scale), 0 = invalid. Throws
// DataError naming the first pixel whose level would exceed 65535.
std::string writeDepthPng(const DepthImage& img, double depth_scale = kDefaultDepthScale);
// Throws DataError unless the PNG is single-channel 16-bit.
DepthImage readDepthPng(std::string_view bytes, double depth_scale = kDefaultDepthScale);

// COCO instance-annotation JSON. Keys are emitted in sorted order so the
// output is canonical.
nlohmann::json annotationsToJson(const AnnotationSet& set);
AnnotationSet annotationsFromJson(const nlohmann::json& doc);
std::string writeAnnotations(const AnnotationSet& set);
// Throws ParseError located by JSON pointer on schema violations.
AnnotationSet readAnnotations(std::string_view bytes);

// COCO results format: [{image_id, category_id, segmentation, score}].
std::string writePredictions(const std::vector<Prediction>& preds);
std::vector<Prediction> readPredictions(std::string_view bytes);

struct DatasetManifest {
  std::string name = "binseg";
  double depth_scale = kDefaultDepthScale;
  int width = 0, height = 0;
  std::string split = "all";
  std::uint64_t master_seed = 0;
  std::string config_hash;
  std::size_t num_images = 0;
  std::size_t num_instances = 0;
  std::vector<std::string> object_ids;
  bool complete = false;
};

nlohmann::json manifestToJson(const DatasetManifest& m);
DatasetManifest manifestFromJson(const nlohmann::json& doc);

struct ObjectSplit {
  std::vector<std::string> train, val;  // each sorted
};

// Seeded shuffle, first ceil(fraction * N) ids to train (kept within
// [1, N - 1]), the rest to val.
ObjectSplit splitObjects(std::vector<std::string> ids, double fraction,
                         std::uint64_t seed);

// Places `img` at the origin of a target-sized image; new pixels invalid.
DepthImage padImage(const DepthImage& img, int width, int height);

// 64-bit FNV-1a, hex encoded.
std::string fnv1aHex(std::string_view bytes);
// Hash over sorted relative paths and file contents.
std::string hashDirectory(const std::filesystem::path& dir);

std::string readFile(const std::filesystem::path& path);
void writeFile(const std::filesystem::path& path, std::string_view bytes);

}  // namespace binseg
