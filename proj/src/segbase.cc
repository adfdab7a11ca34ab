#include "binseg/segbase.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "binseg/kdtree.h"

namespace binseg {

void SegParams::validate() const {
  if (!(euclidean.radius > 0)) throw ArgumentError("euclidean.radius must be > 0");
  if (euclidean.min_cluster <= 0 || euclidean.min_cluster > euclidean.max_cluster)
    throw ArgumentError("need 0 < euclidean.min_cluster <= max_cluster");
  if (region_growing.k_neighbors < 3) throw ArgumentError("k_neighbors must be >= 3");
  if (!(region_growing.angle_threshold > 0 && region_growing.angle_threshold < std::numbers::pi))
    throw ArgumentError("angle_threshold must lie in (0, pi)");
  if (region_growing.min_cluster <= 0) throw ArgumentError("region_growing.min_cluster must be > 0");
  if (!(background_delta >= 0)) throw ArgumentError("background_delta must be >= 0");
}

std::vector<int> OrganizedCloud::validIndices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < valid.size(); ++i)
    if (valid[i]) out.push_back(int(i));
  return out;
}

InpaintResult inpaintDepth(const DepthImage& img) {
  InpaintResult result{img, false};
  DepthImage& out = result.image;
  const int w = img.width(), h = img.height();
  if (img.size() == 0) return result;
  if (out.validCount() == 0) {
    result.all_invalid = true;
    return result;
  }
  auto hasValidNeighbor = [&](int u, int v) {
    for (int dv = -1; dv <= 1; ++dv)
      for (int du = -1; du <= 1; ++du) {
        const int x = u + du, y = v + dv;
        if ((du || dv) && x >= 0 && y >= 0 && x < w && y < h && out(x, y) > 0) return true;
      }
    return false;
  };
  std::vector<std::pair<int, int>> frontier;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      if (out(u, v) <= 0 && hasValidNeighbor(u, v)) frontier.emplace_back(u, v);

  const int max_passes = 10 * std::max(w, h);
  std::vector<float> values;
  std::vector<std::uint8_t> queued(img.size(), 0);
  for (int pass = 0; pass < max_passes && !frontier.empty(); ++pass) {
    values.clear();
    for (auto [u, v] : frontier) {
      double sum = 0;
      int n = 0;
      for (int dv = -1; dv <= 1; ++dv)
        for (int du = -1; du <= 1; ++du) {
          const int x = u + du, y = v + dv;
          if ((du || dv) && x >= 0 && y >= 0 && x < w && y < h && out(x, y) > 0) {
            sum += out(x, y);
            ++n;
          }
        }
      values.push_back(float(sum / n));
    }
    for (std::size_t i = 0; i < frontier.size(); ++i)
      out(frontier[i].first, frontier[i].second) = values[i];
    std::vector<std::pair<int, int>> next;
    for (auto [u, v] : frontier)
      for (int dv = -1; dv <= 1; ++dv)
        for (int du = -1; du <= 1; ++du) {
          const int x = u + du, y = v + dv;
          if (x < 0 || y < 0 || x >= w || y >= h || out(x, y) > 0) continue;
          const std::size_t idx = std::size_t(y) * w + x;
          if (queued[idx]) continue;
          queued[idx] = 1;
          next.emplace_back(x, y);
        }
    for (auto [x, y] : next) queued[std::size_t(y) * w + x] = 0;
    std::sort(next.begin(), next.end(), [](auto a, auto b) {
      return std::tie(a.second, a.first) < std::tie(b.second, b.first);
    });
    frontier.swap(next);
  }
  return result;
}

OrganizedCloud backproject(const DepthImage& img, const CameraIntrinsics& k) {
  OrganizedCloud cloud;
  cloud.width = img.width();
  cloud.height = img.height();
  cloud.points.assign(img.size(), Vec3::Zero());
  cloud.valid.assign(img.size(), 0);
  for (int v = 0; v < img.height(); ++v)
    for (int u = 0; u < img.width(); ++u) {
      const float d = img(u, v);
      if (d <= 0) continue;
      const std::size_t i = std::size_t(v) * img.width() + u;
      cloud.points[i] = deproject(k, u + 0.5, v + 0.5, d);
      cloud.valid[i] = 1;
    }
  return cloud;
}

InstanceMask subtractBackground(const DepthImage& img, const DepthImage& background,
                                double delta) {
  if (img.width() != background.width() || img.height() != background.height())
    throw ArgumentError("background dimension mismatch");
  Bitmap fg = Bitmap::Zero(img.height(), img.width());
  for (int v = 0; v < img.height(); ++v)
    for (int u = 0; u < img.width(); ++u) {
      const float d = img(u, v);
      if (d <= 0) continue;
      const float b = background(u, v);
      if (b <= 0 || double(b) - double(d) > delta) fg(v, u) = 1;
    }
  return InstanceMask::fromBitmap(fg);
}

namespace {

struct IndexedTree {
  std::vector<int> ids;  // tree position -> cloud index
  KdTree tree;
};

IndexedTree buildTree(const OrganizedCloud& cloud, const std::vector<std::uint8_t>& mask) {
  std::vector<int> ids;
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (mask[i]) {
      ids.push_back(int(i));
      pts.push_back(cloud.points[i]);
    }
  return {std::move(ids), KdTree(std::move(pts))};
}

std::vector<Cluster> finishClusters(std::vector<Cluster> clusters) {
  for (Cluster& c : clusters) std::sort(c.begin(), c.end());
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return clusters;
}

}  // namespace

NormalsField estimateNormals(const OrganizedCloud& cloud, int k) {
  if (k < 3) throw ArgumentError("k must be >= 3");
  NormalsField field;
  field.normals.assign(cloud.size(), Vec3::Zero());
  field.curvature.assign(cloud.size(), 0.0);
  field.valid.assign(cloud.size(), 0);
  const IndexedTree t = buildTree(cloud, cloud.valid);
  if (t.ids.size() < 3) return field;
  Eigen::SelfAdjointEigenSolver<Mat3> solver;
  for (std::size_t pos = 0; pos < t.ids.size(); ++pos) {
    const int idx = t.ids[pos];
    const Vec3& p = cloud.points[idx];
    const std::vector<int> nn = t.tree.knn(p, k);
    if (nn.size() < 3) continue;
    Vec3 mean = Vec3::Zero();
    for (int j : nn) mean += t.tree.point(j);
    mean /= double(nn.size());
    Mat3 cov = Mat3::Zero();
    for (int j : nn) {
      const Vec3 d = t.tree.point(j) - mean;
      cov.noalias() += d * d.transpose();
    }
    cov /= double(nn.size());
    solver.computeDirect(cov);
    const Vec3 lambda = solver.eigenvalues().cwiseMax(0.0);
    const double sum = lambda.sum();
    if (!(sum > 0)) continue;
    Vec3 n = solver.eigenvectors().col(0).normalized();
    if (n.dot(-p) < 0) n = -n;
    field.normals[idx] = n;
    field.curvature[idx] = lambda[0] / sum;
    field.valid[idx] = 1;
  }
  return field;
}

std::vector<Cluster> euclideanCluster(const OrganizedCloud& cloud,
                                      const EuclideanParams& params) {
  if (!(params.radius > 0)) throw ArgumentError("radius must be > 0");
  const IndexedTree t = buildTree(cloud, cloud.valid);
  const std::size_t n = t.ids.size();
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<Cluster> clusters;
  std::vector<int> nbrs;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<int> members{int(s)};
    seen[s] = 1;
    for (std::size_t head = 0; head < members.size(); ++head) {
      t.tree.radius(t.tree.point(members[head]), params.radius, nbrs);
      for (int j : nbrs)
        if (!seen[j]) {
          seen[j] = 1;
          members.push_back(j);
        }
    }
    if (int(members.size()) < params.min_cluster || int(members.size()) > params.max_cluster)
      continue;
    Cluster c;
    c.reserve(members.size());
    for (int j : members) c.push_back(t.ids[j]);
    clusters.push_back(std::move(c));
  }
  return finishClusters(std::move(clusters));
}

std::vector<Cluster> regionGrow(const OrganizedCloud& cloud,
                                const NormalsField& normals,
                                const RegionGrowingParams& params) {
  if (normals.valid.size() != cloud.size()) throw ArgumentError("normals/cloud size mismatch");
  std::vector<std::uint8_t> usable(cloud.size(), 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) usable[i] = cloud.valid[i] && normals.valid[i];
  const IndexedTree t = buildTree(cloud, usable);
  const std::size_t n = t.ids.size();
  const double cos_threshold = std::cos(params.angle_threshold);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ca = normals.curvature[t.ids[a]], cb = normals.curvature[t.ids[b]];
    return ca < cb || (ca == cb && a < b);
  });

  // k nearest neighbors excluding the point itself.
  const int k = params.k_neighbors;
  std::vector<std::uint8_t> assigned(n, 0);
  std::vector<Cluster> clusters;
  for (int seed : order) {
    if (assigned[seed]) continue;
    std::vector<int> region{seed};
    assigned[seed] = 1;
    std::deque<int> queue{seed};
    while (!queue.empty()) {
      const int cur = queue.front();
      queue.pop_front();
      const Vec3& ncur = normals.normals[t.ids[cur]];
      for (int j : t.tree.knn(t.tree.point(cur), k + 1)) {
        if (j == cur || assigned[j]) continue;
        const int idx = t.ids[j];
        if (ncur.dot(normals.normals[idx]) < cos_threshold) continue;
        assigned[j] = 1;
        region.push_back(j);
        if (normals.curvature[idx] <= params.curvature_threshold) queue.push_back(j);
      }
    }
    if (int(region.size()) < params.min_cluster) continue;
    Cluster c;
    c.reserve(region.size());
    for (int j : region) c.push_back(t.ids[j]);
    clusters.push_back(std::move(c));
  }
  return finishClusters(std::move(clusters));
}

std::vector<InstanceMask> clustersToMasks(const std::vector<Cluster>& clusters,
                                          int width, int height) {
  std::vector<InstanceMask> masks;
  masks.reserve(clusters.size());
  for (const Cluster& c : clusters) {
    Bitmap bm = Bitmap::Zero(height, width);
    for (int idx : c) bm(idx / width, idx % width) = 1;
    masks.push_back(InstanceMask::fromBitmap(bm));
  }
  return masks;
}

std::vector<ScoredMask> segment(const DepthImage& img, const CameraModel& camera,
                                const DepthImage& background,
                                const SegParams& params, SegMethod method) {
  params.validate();
  const DepthImage filled = inpaintDepth(img).image;
  OrganizedCloud cloud = backproject(filled, camera.intrinsics);
  const Bitmap fg = subtractBackground(filled, background, params.background_delta).toBitmap();
  for (int v = 0; v < cloud.height; ++v)
    for (int u = 0; u < cloud.width; ++u)
      if (!fg(v, u)) cloud.valid[std::size_t(v) * cloud.width + u] = 0;

  std::vector<Cluster> clusters;
  if (method == SegMethod::kEuclidean) {
    clusters = euclideanCluster(cloud, params.euclidean);
  } else {
    const NormalsField normals = estimateNormals(cloud, params.region_growing.k_neighbors);
    clusters = regionGrow(cloud, normals, params.region_growing);
  }
  std::vector<ScoredMask> out;
  for (InstanceMask& m : clustersToMasks(clusters, cloud.width, cloud.height))
    out.push_back({std::move(m), 1.0});
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredMask& a, const ScoredMask& b) { return a.mask.area() > b.mask.area(); });
  return out;
}

}  // namespace binseg
