#include "binseg/kdtree.h"

#include <algorithm>
#include <numeric>
#include <queue>

namespace binseg {

namespace {
constexpr int kLeafSize = 12;
}

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, int(points_.size()));
  }
}

int KdTree::build(int begin, int end) {
  const int id = int(nodes_.size());
  nodes_.push_back({begin, end});
  Eigen::AlignedBox3d box;
  for (int i = begin; i < end; ++i) box.extend(points_[order_[i]]);
  nodes_[id].box = box;
  if (end - begin <= kLeafSize) return id;
  int axis;
  box.sizes().maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

namespace {

// Lower bound on the squared distance from q to any point in the box, padded
// so rounding can never prune a point that the exact comparison would keep.
double boxDistance2(const Eigen::AlignedBox3d& box, const Vec3& q) {
  return box.squaredExteriorDistance(q) * (1.0 - 1e-12);
}

}  // namespace

std::vector<int> KdTree::knn(const Vec3& q, int k) const {
  std::vector<int> out;
  if (points_.empty() || k <= 0) return out;
  using Entry = std::pair<double, int>;  // (d2, index); max-heap on this order
  std::priority_queue<Entry> best;
  const std::size_t want = std::min<std::size_t>(std::size_t(k), points_.size());
  // Depth-first with near child first.
  auto visit = [&](auto&& self, int node_id) -> void {
    const Node& node = nodes_[node_id];
    if (best.size() == want && boxDistance2(node.box, q) > best.top().first) return;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        const Entry e{(points_[idx] - q).squaredNorm(), idx};
        if (best.size() < want) {
          best.push(e);
        } else if (e < best.top()) {
          best.pop();
          best.push(e);
        }
      }
      return;
    }
    const bool go_left = q[node.axis] < node.split;
    self(self, go_left ? node.left : node.right);
    self(self, go_left ? node.right : node.left);
  };
  visit(visit, 0);
  out.resize(best.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = best.top().second;
    best.pop();
  }
  return out;
}

void KdTree::radius(const Vec3& q, double r, std::vector<int>& out) const {
  out.clear();
  if (points_.empty()) return;
  const double r2 = r * r;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (boxDistance2(node.box, q) > r2) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        if ((points_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(out.begin(), out.end());
}

}  // namespace binseg
