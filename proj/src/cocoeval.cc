#include "binseg/cocoeval.h"

#include <algorithm>
#include <numeric>

namespace binseg {

double iouThreshold(int i) { return double(50 + 5 * i) / 100.0; }

std::array<double, kNumIouThresholds> iouThresholds() {
  std::array<double, kNumIouThresholds> t{};
  for (int i = 0; i < kNumIouThresholds; ++i) t[i] = iouThreshold(i);
  return t;
}

std::vector<std::size_t> rankPredictions(const std::vector<Prediction>& preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
    return preds[a].mask.area() > preds[b].mask.area();
  });
  return order;
}

namespace {

using IouMatrix = std::vector<std::vector<double>>;  // [pred][gt]

IouMatrix iouMatrix(const std::vector<Prediction>& preds,
                    const std::vector<InstanceMask>& gts) {
  IouMatrix ious(preds.size(), std::vector<double>(gts.size()));
  for (std::size_t d = 0; d < preds.size(); ++d)
    for (std::size_t g = 0; g < gts.size(); ++g) ious[d][g] = maskIou(preds[d].mask, gts[g]);
  return ious;
}

MatchResult matchWithIous(const IouMatrix& ious, std::size_t num_gt, double threshold) {
  MatchResult r;
  r.pred_matched.assign(ious.size(), false);
  r.pred_gt.assign(ious.size(), -1);
  r.gt_matched.assign(num_gt, false);
  for (std::size_t d = 0; d < ious.size(); ++d) {
    int best = -1;
    double best_iou = threshold;
    for (std::size_t g = 0; g < num_gt; ++g) {
      if (r.gt_matched[g]) continue;
      const double iou = ious[d][g];
      if (iou < threshold) continue;
      if (best < 0 || iou > best_iou) {
        best = int(g);
        best_iou = iou;
      }
    }
    if (best >= 0) {
      r.pred_matched[d] = true;
      r.pred_gt[d] = best;
      r.gt_matched[best] = true;
    }
  }
  return r;
}

struct ImageEval {
  std::vector<double> scores;       // ranked, capped
  std::vector<std::uint64_t> areas;
  std::vector<std::size_t> global;  // position in the caller's prediction list
  std::vector<MatchResult> matches;  // per threshold
  std::size_t num_gt = 0;
};

struct Pooled {
  std::vector<ImageEval> images;
  std::size_t num_gt = 0;
};

Pooled evaluateImages(const std::vector<Prediction>& preds,
                      const std::vector<GroundTruth>& gts,
                      const std::vector<double>& thresholds, int max_detections) {
  std::map<std::int64_t, std::vector<std::size_t>> pred_by_image;
  std::map<std::int64_t, std::vector<InstanceMask>> gt_by_image;
  for (std::size_t i = 0; i < preds.size(); ++i) pred_by_image[preds[i].image_id].push_back(i);
  for (const GroundTruth& g : gts) gt_by_image[g.image_id].push_back(g.mask);
  std::vector<std::int64_t> image_ids;
  for (const auto& [id, _] : pred_by_image) image_ids.push_back(id);
  for (const auto& [id, _] : gt_by_image) image_ids.push_back(id);
  std::sort(image_ids.begin(), image_ids.end());
  image_ids.erase(std::unique(image_ids.begin(), image_ids.end()), image_ids.end());

  Pooled pooled;
  pooled.num_gt = gts.size();
  static const std::vector<InstanceMask> kNoGt;
  static const std::vector<std::size_t> kNoPred;
  for (std::int64_t id : image_ids) {
    auto pit = pred_by_image.find(id);
    auto git = gt_by_image.find(id);
    const auto& pidx = pit == pred_by_image.end() ? kNoPred : pit->second;
    const auto& gmasks = git == gt_by_image.end() ? kNoGt : git->second;
    std::vector<Prediction> local;
    for (std::size_t i : pidx) local.push_back(preds[i]);
    std::vector<std::size_t> order = rankPredictions(local);
    if (max_detections >= 0 && order.size() > std::size_t(max_detections))
      order.resize(std::size_t(max_detections));
    std::vector<Prediction> ranked;
    ImageEval ev;
    for (std::size_t o : order) {
      ranked.push_back(local[o]);
      ev.scores.push_back(local[o].score);
      ev.areas.push_back(local[o].mask.area());
      ev.global.push_back(pidx[o]);
    }
    ev.num_gt = gmasks.size();
    const IouMatrix ious = iouMatrix(ranked, gmasks);
    for (double t : thresholds) ev.matches.push_back(matchWithIous(ious, gmasks.size(), t));
    pooled.images.push_back(std::move(ev));
  }
  return pooled;
}

struct Detection {
  double score;
  std::uint64_t area;
  std::size_t global;
  bool tp;
};

// Global ranking across images for one threshold.
std::vector<Detection> pooledDetections(const Pooled& pooled, std::size_t t) {
  std::vector<Detection> dets;
  for (const ImageEval& ev : pooled.images)
    for (std::size_t d = 0; d < ev.scores.size(); ++d)
      dets.push_back({ev.scores[d], ev.areas[d], ev.global[d], ev.matches[t].pred_matched[d]});
  std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.area != b.area) return a.area > b.area;
    return a.global < b.global;
  });
  return dets;
}

struct Curve {
  std::vector<double> recall, precision;
};

Curve rawCurve(const std::vector<Detection>& dets, std::size_t num_gt) {
  Curve c;
  std::size_t tp = 0, fp = 0;
  for (const Detection& d : dets) {
    (d.tp ? tp : fp) += 1;
    c.recall.push_back(double(tp) / double(num_gt));
    c.precision.push_back(double(tp) / double(tp + fp));
  }
  return c;
}

// Returns AP and fills the 101 interpolated precision samples.
double interpolatedAp(const Curve& c, std::array<double, kNumRecallPoints>& samples) {
  std::vector<double> env = c.precision;
  for (std::size_t i = env.size(); i-- > 1;) env[i - 1] = std::max(env[i - 1], env[i]);
  double sum = 0;
  for (int r = 0; r < kNumRecallPoints; ++r) {
    const double level = double(r) / 100.0;
    const auto it = std::lower_bound(c.recall.begin(), c.recall.end(), level);
    samples[r] = it == c.recall.end() ? 0.0 : env[std::size_t(it - c.recall.begin())];
    sum += samples[r];
  }
  return sum / kNumRecallPoints;
}

void requireGt(const std::vector<GroundTruth>& gts) {
  if (gts.empty()) throw DataError("empty ground truth");
}

}  // namespace

MatchResult matchPredictions(const std::vector<Prediction>& preds,
                             const std::vector<InstanceMask>& gts,
                             double iou_threshold) {
  return matchWithIous(iouMatrix(preds, gts), gts.size(), iou_threshold);
}

EvalReport evaluate(const std::vector<Prediction>& preds,
                    const std::vector<GroundTruth>& gts, const EvalOptions& options) {
  requireGt(gts);
  const auto thresholds = iouThresholds();
  const Pooled pooled = evaluateImages(preds, gts, {thresholds.begin(), thresholds.end()},
                                       options.max_detections);
  EvalReport report;
  report.num_images = pooled.images.size();
  report.num_gt = pooled.num_gt;
  for (const ImageEval& ev : pooled.images) report.num_predictions += ev.scores.size();
  for (int t = 0; t < kNumIouThresholds; ++t) {
    const Curve c = rawCurve(pooledDetections(pooled, std::size_t(t)), pooled.num_gt);
    report.ap_per_threshold[t] = interpolatedAp(c, report.precision[t]);
    report.recall_per_threshold[t] = c.recall.empty() ? 0.0 : c.recall.back();
  }
  report.ap = std::accumulate(report.ap_per_threshold.begin(), report.ap_per_threshold.end(), 0.0) /
              kNumIouThresholds;
  report.ap50 = report.ap_per_threshold[0];
  report.ap75 = report.ap_per_threshold[5];
  report.ar100 = std::accumulate(report.recall_per_threshold.begin(),
                                 report.recall_per_threshold.end(), 0.0) /
                 kNumIouThresholds;
  return report;
}

std::vector<double> averagePrecision(const std::vector<Prediction>& preds,
                                     const std::vector<GroundTruth>& gts,
                                     const std::vector<double>& thresholds,
                                     const EvalOptions& options) {
  requireGt(gts);
  const Pooled pooled = evaluateImages(preds, gts, thresholds, options.max_detections);
  std::vector<double> out;
  std::array<double, kNumRecallPoints> samples{};
  for (std::size_t t = 0; t < thresholds.size(); ++t)
    out.push_back(interpolatedAp(rawCurve(pooledDetections(pooled, t), pooled.num_gt), samples));
  return out;
}

double averageRecall(const std::vector<Prediction>& preds,
                     const std::vector<GroundTruth>& gts, int max_detections) {
  return evaluate(preds, gts, {max_detections}).ar100;
}

std::vector<PrPoint> prCurve(const std::vector<Prediction>& preds,
                             const std::vector<GroundTruth>& gts, double iou_threshold,
                             const EvalOptions& options) {
  requireGt(gts);
  const Pooled pooled = evaluateImages(preds, gts, {iou_threshold}, options.max_detections);
  const Curve c = rawCurve(pooledDetections(pooled, 0), pooled.num_gt);
  std::vector<PrPoint> out;
  for (std::size_t i = 0; i < c.recall.size(); ++i) out.push_back({c.recall[i], c.precision[i]});
  return out;
}

std::vector<Prediction> filterAndNms(const std::vector<Prediction>& preds,
                                     const InstanceMask& foreground, double overlap,
                                     double nms_iou) {
  std::vector<Prediction> kept_fg;
  for (const Prediction& p : preds) {
    if (p.mask.area() == 0) continue;
    const double frac = double(intersectionArea(p.mask, foreground)) / double(p.mask.area());
    if (frac >= overlap) kept_fg.push_back(p);
  }
  std::vector<Prediction> out;
  for (std::size_t i : rankPredictions(kept_fg)) {
    bool suppressed = false;
    for (const Prediction& k : out)
      if (maskIou(kept_fg[i].mask, k.mask) >= nms_iou) {
        suppressed = true;
        break;
      }
    if (!suppressed) out.push_back(kept_fg[i]);
  }
  return out;
}

DatasetStats datasetStats(const std::vector<ImageInstances>& images) {
  if (images.empty()) throw DataError("empty annotation set");
  DatasetStats s;
  s.num_images = images.size();
  std::size_t max_count = 0;
  double fraction_sum = 0;
  std::vector<double> fractions;
  for (const ImageInstances& img : images) {
    max_count = std::max(max_count, img.areas.size());
    s.num_instances += img.areas.size();
    const double pixels = double(img.width) * double(img.height);
    for (std::uint64_t a : img.areas) {
      const double f = pixels > 0 ? double(a) / pixels : 0.0;
      fractions.push_back(f);
      fraction_sum += f;
    }
  }
  s.mean_instances_per_image = double(s.num_instances) / double(s.num_images);
  s.mean_area_fraction = fractions.empty() ? 0.0 : fraction_sum / double(fractions.size());

  s.instances_per_image.counts.assign(max_count + 1, 0);
  for (std::size_t i = 0; i <= max_count + 1; ++i) s.instances_per_image.edges.push_back(double(i));
  for (const ImageInstances& img : images) ++s.instances_per_image.counts[img.areas.size()];

  constexpr int kAreaBins = 20;
  constexpr double kAreaBinWidth = 0.005;
  for (int i = 0; i <= kAreaBins; ++i) s.area_fraction.edges.push_back(i * kAreaBinWidth);
  s.area_fraction.edges.back() = 1.0;
  s.area_fraction.counts.assign(kAreaBins, 0);
  for (double f : fractions)
    ++s.area_fraction.counts[std::min(kAreaBins - 1, int(f / kAreaBinWidth))];
  return s;
}

}  // namespace binseg
