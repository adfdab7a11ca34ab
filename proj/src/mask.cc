#include "binseg/mask.h"

#include <algorithm>

namespace binseg {

InstanceMask::InstanceMask(int width, int height,
                           std::vector<std::uint32_t> counts)
    : width_(width), height_(height), counts_(std::move(counts)) {
  if (width < 0 || height < 0) throw ArgumentError("negative mask size");
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    total += counts_[i];
    if (i % 2 == 1) area_ += counts_[i];
  }
  if (total != std::uint64_t(width) * std::uint64_t(height))
    throw DataError("RLE counts sum to " + std::to_string(total) +
                    ", expected " +
                    std::to_string(std::uint64_t(width) * height));
}

InstanceMask InstanceMask::fromBitmap(const Bitmap& bitmap) {
  std::vector<std::uint32_t> counts;
  const std::uint8_t* p = bitmap.data();
  const Eigen::Index n = bitmap.size();
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::uint8_t bit = p[i] ? 1 : 0;
    if (bit != current) {
      counts.push_back(run);
      run = 0;
      current = bit;
    }
    ++run;
  }
  counts.push_back(run);
  return InstanceMask(int(bitmap.cols()), int(bitmap.rows()),
                      std::move(counts));
}

InstanceMask InstanceMask::empty(int width, int height) {
  return InstanceMask(width, height,
                      {std::uint32_t(std::uint64_t(width) * height)});
}

Bitmap InstanceMask::toBitmap() const {
  Bitmap bitmap = Bitmap::Zero(height_, width_);
  std::uint8_t* p = bitmap.data();
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (i % 2 == 1) std::fill_n(p + pos, counts_[i], std::uint8_t(1));
    pos += counts_[i];
  }
  return bitmap;
}

BoundingBox InstanceMask::bbox() const {
  if (area_ == 0 || height_ == 0) return {};
  int xmin = width_, xmax = -1, ymin = height_, ymax = -1;
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (i % 2 == 1 && counts_[i] > 0) {
      const std::uint64_t first = pos, last = pos + counts_[i] - 1;
      const int x0 = int(first / height_), x1 = int(last / height_);
      xmin = std::min(xmin, x0);
      xmax = std::max(xmax, x1);
      if (x0 != x1) {
        // Run wraps a column boundary, so it covers the full column span.
        ymin = 0;
        ymax = height_ - 1;
      } else {
        ymin = std::min(ymin, int(first % height_));
        ymax = std::max(ymax, int(last % height_));
      }
    }
    pos += counts_[i];
  }
  return {xmin, ymin, xmax - xmin + 1, ymax - ymin + 1};
}

namespace {

void checkSameSize(const InstanceMask& a, const InstanceMask& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw ArgumentError("mask dimension mismatch");
}

// Walks the run boundaries of two masks in lockstep and calls
// f(length, bit_a, bit_b) for each maximal common segment.
template <typename F>
void mergeRuns(const InstanceMask& a, const InstanceMask& b, F&& f) {
  const auto& ca = a.counts();
  const auto& cb = b.counts();
  std::size_t ia = 0, ib = 0;
  std::uint64_t ra = ca.empty() ? 0 : ca[0];
  std::uint64_t rb = cb.empty() ? 0 : cb[0];
  while (ia < ca.size() && ib < cb.size()) {
    if (ra == 0) {
      if (++ia < ca.size()) ra = ca[ia];
      continue;
    }
    if (rb == 0) {
      if (++ib < cb.size()) rb = cb[ib];
      continue;
    }
    const std::uint64_t step = std::min(ra, rb);
    f(step, ia % 2 == 1, ib % 2 == 1);
    ra -= step;
    rb -= step;
  }
}

}  // namespace

std::uint64_t intersectionArea(const InstanceMask& a, const InstanceMask& b) {
  checkSameSize(a, b);
  std::uint64_t inter = 0;
  mergeRuns(a, b, [&](std::uint64_t n, bool x, bool y) {
    if (x && y) inter += n;
  });
  return inter;
}

double maskIou(const InstanceMask& a, const InstanceMask& b) {
  const std::uint64_t inter = intersectionArea(a, b);
  const std::uint64_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

InstanceMask maskUnion(const InstanceMask& a, const InstanceMask& b) {
  checkSameSize(a, b);
  std::vector<std::uint32_t> counts;
  bool current = false;
  std::uint64_t run = 0;
  mergeRuns(a, b, [&](std::uint64_t n, bool x, bool y) {
    const bool bit = x || y;
    if (bit != current) {
      counts.push_back(std::uint32_t(run));
      run = 0;
      current = bit;
    }
    run += n;
  });
  counts.push_back(std::uint32_t(run));
  return InstanceMask(a.width(), a.height(), std::move(counts));
}

std::string encodeRleString(const std::vector<std::uint32_t>& counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    long long x = counts[i];
    if (i > 2) x -= counts[i - 2];
    bool more = true;
    while (more) {
      char c = char(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(char(c + 48));
    }
  }
  return s;
}

std::vector<std::uint32_t> decodeRleString(std::string_view s) {
  std::vector<long long> counts;
  std::size_t p = 0;
  while (p < s.size()) {
    long long x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= s.size())
        throw ParseError("truncated RLE string", "offset " + std::to_string(p));
      const int c = int(static_cast<unsigned char>(s[p])) - 48;
      if (c < 0 || c > 63)
        throw ParseError("invalid RLE character", "offset " + std::to_string(p));
      if (k > 12) throw ParseError("RLE count too long", "offset " + std::to_string(p));
      x |= static_cast<long long>(c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= -1LL << (5 * k);
    }
    if (counts.size() > 2) x += counts[counts.size() - 2];
    if (x < 0 || x > 0xffffffffLL)
      throw ParseError("RLE count out of range", "offset " + std::to_string(p));
    counts.push_back(x);
  }
  return {counts.begin(), counts.end()};
}

}  // namespace binseg
