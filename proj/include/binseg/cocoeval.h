#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "binseg/mask.h"

namespace binseg {

struct Prediction {
  std::int64_t image_id = 0;
  InstanceMask mask;
  double score = 0;
};

struct GroundTruth {
  std::int64_t image_id = 0;
  InstanceMask mask;
};

inline constexpr int kNumIouThresholds = 10;
inline constexpr int kNumRecallPoints = 101;

// 0.50, 0.55, ..., 0.95.
double iouThreshold(int i);
std::array<double, kNumIouThresholds> iouThresholds();

struct MatchResult {
  std::vector<bool> pred_matched;   // per prediction, in the given order
  std::vector<int> pred_gt;         // matched gt index or -1
  std::vector<bool> gt_matched;
};

// Orders predictions by score descending, then mask area descending, then
// input position. Returns indices into `preds`.
std::vector<std::size_t> rankPredictions(const std::vector<Prediction>& preds);

// Greedy single-image matching. `preds` must already be ranked: each takes
// the unmatched gt of highest IoU (lowest index on ties) if that IoU reaches
// the threshold.
MatchResult matchPredictions(const std::vector<Prediction>& preds,
                             const std::vector<InstanceMask>& gts,
                             double iou_threshold);

struct EvalReport {
  double ap = 0;
  double ap50 = 0;
  double ap75 = 0;
  double ar100 = 0;
  std::array<double, kNumIouThresholds> ap_per_threshold{};
  std::array<double, kNumIouThresholds> recall_per_threshold{};
  // Interpolated precision at recall 0.00, 0.01, ..., 1.00 per threshold.
  std::array<std::array<double, kNumRecallPoints>, kNumIouThresholds> precision{};
  std::size_t num_images = 0;
  std::size_t num_gt = 0;
  std::size_t num_predictions = 0;   // after the per-image detection cap
};

struct EvalOptions {
  int max_detections = 100;
};

// Full COCO-style segmentation evaluation (single category, no crowd
// regions, all areas). Throws DataError("empty ground truth") when there is
// no ground-truth instance.
EvalReport evaluate(const std::vector<Prediction>& preds,
                    const std::vector<GroundTruth>& gts,
                    const EvalOptions& options = {});

// AP at an arbitrary list of thresholds; returns one value per threshold.
std::vector<double> averagePrecision(const std::vector<Prediction>& preds,
                                     const std::vector<GroundTruth>& gts,
                                     const std::vector<double>& thresholds,
                                     const EvalOptions& options = {});

double averageRecall(const std::vector<Prediction>& preds,
                     const std::vector<GroundTruth>& gts,
                     int max_detections = 100);

struct PrPoint {
  double recall, precision;
};

// Raw (uninterpolated) operating points at one IoU threshold, one per
// prediction in global rank order.
std::vector<PrPoint> prCurve(const std::vector<Prediction>& preds,
                             const std::vector<GroundTruth>& gts,
                             double iou_threshold = 0.5,
                             const EvalOptions& options = {});

// Drops predictions with less than `overlap` of their area on the
// foreground, then greedy NMS: a prediction is dropped if its IoU with an
// already-kept, higher-ranked prediction is >= nms_iou.
std::vector<Prediction> filterAndNms(const std::vector<Prediction>& preds,
                                     const InstanceMask& foreground,
                                     double overlap = 0.5, double nms_iou = 0.5);

struct Histogram {
  std::vector<double> edges;   // size = counts.size() + 1
  std::vector<std::uint64_t> counts;
};

struct DatasetStats {
  std::size_t num_images = 0;
  std::size_t num_instances = 0;
  double mean_instances_per_image = 0;
  double mean_area_fraction = 0;
  Histogram instances_per_image;  // unit-width bins 0, 1, 2, ...
  Histogram area_fraction;        // 0.5% bins up to 10%, last bin open
};

struct ImageInstances {
  int width = 0, height = 0;
  std::vector<std::uint64_t> areas;
};

// Throws DataError when `images` is empty.
DatasetStats datasetStats(const std::vector<ImageInstances>& images);

}  // namespace binseg
