#pragma once

#include <vector>

#include "binseg/types.h"

namespace binseg {

// Static 3D k-d tree over a point set. Query results refer to positions in
// the input vector and are exact (no approximation); ties in distance are
// broken by ascending index.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }
  const Vec3& point(int i) const { return points_[i]; }

  // The min(k, size) nearest points to q ordered by (distance, index);
  // includes q itself when q is in the set.
  std::vector<int> knn(const Vec3& q, int k) const;

  // All points with squared distance <= r * r, ascending index.
  void radius(const Vec3& q, double r, std::vector<int>& out) const;

 private:
  struct Node {
    int begin, end;     // range in order_
    int left = -1, right = -1;
    int axis = -1;
    double split = 0;
    Eigen::AlignedBox3d box;
  };

  int build(int begin, int end);

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace binseg
