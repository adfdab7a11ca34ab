#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "binseg/mask.h"
#include "binseg/types.h"

namespace binseg {

struct AnnotationInstance {
  std::int64_t id = 0;  // unique across the whole set
  InstanceMask mask;    // area and bbox are derived from it
  int object_index = -1;
  std::string model_id;
};

struct AnnotatedImage {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0, height = 0;
  std::optional<CameraModel> camera;
  std::vector<AnnotationInstance> instances;
};

// Single-category ("object") instance annotations for a set of depth images.
struct AnnotationSet {
  double depth_scale = 10000.0;
  std::string split = "all";
  std::vector<AnnotatedImage> images;

  // Throws DataError on empty masks, mask/image size mismatches, duplicate
  // image ids or duplicate instance ids.
  void validate() const;
};

}  // namespace binseg
