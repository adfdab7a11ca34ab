#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "binseg/error.h"

namespace binseg {

// Dense binary image, rows = height, cols = width. Eigen's column-major
// storage makes data() run in COCO RLE order (x outer, y inner).
using Bitmap = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct BoundingBox {
  int x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Binary mask stored as COCO run-length encoding: alternating counts of 0s and
// 1s in column-major order, starting with a (possibly zero) run of 0s.
class InstanceMask {
 public:
  InstanceMask() = default;
  // Validates that the runs sum to width * height.
  InstanceMask(int width, int height, std::vector<std::uint32_t> counts);

  static InstanceMask fromBitmap(const Bitmap& bitmap);
  static InstanceMask empty(int width, int height);

  Bitmap toBitmap() const;

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }
  std::uint64_t area() const { return area_; }
  bool isEmpty() const { return area_ == 0; }

  // Tight box around the set pixels; all zeros for an empty mask.
  BoundingBox bbox() const;

  friend bool operator==(const InstanceMask& a, const InstanceMask& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ &&
           a.counts_ == b.counts_;
  }

 private:
  int width_ = 0, height_ = 0;
  std::vector<std::uint32_t> counts_;
  std::uint64_t area_ = 0;
};

// |a & b|. Throws ArgumentError on dimension mismatch.
std::uint64_t intersectionArea(const InstanceMask& a, const InstanceMask& b);

// |a & b| / |a | b|, 0 when both are empty.
double maskIou(const InstanceMask& a, const InstanceMask& b);

// Pixel-wise union / intersection.
InstanceMask maskUnion(const InstanceMask& a, const InstanceMask& b);

// COCO compact string form of RLE counts (as produced by pycocotools).
std::string encodeRleString(const std::vector<std::uint32_t>& counts);
std::vector<std::uint32_t> decodeRleString(std::string_view s);

}  // namespace binseg
