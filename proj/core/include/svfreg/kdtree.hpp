#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "svfreg/types.hpp"

namespace svfreg {

/// Static 3D kd-tree over a point set. Queries are exact; ties are broken
/// toward the smaller point index, so results are deterministic and
/// independent of tree layout.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(const std::vector<Point3>& points);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  /// Index of the nearest point; optionally its squared distance.
  int nearest(const Point3& q, double* sq_dist = nullptr) const;

  /// The k nearest points as (squared distance, index), ascending. Returns
  /// fewer than k entries only when the set is smaller than k.
  std::vector<std::pair<double, int>> knearest(const Point3& q, int k) const;

 private:
  struct Node {
    double split = 0.0;
    int axis = -1;       // -1 marks a leaf
    int left = -1, right = -1;
    int begin = 0, end = 0;  // index range for leaves
  };

  int build(int begin, int end);
  void search(int node, const Point3& q, std::pair<double, int>& best) const;
  void search_k(int node, const Point3& q, std::size_t k,
                std::vector<std::pair<double, int>>& heap) const;

  std::vector<Point3> points_;
  std::vector<int> order_;  // permutation of original indices
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace svfreg
