#include "svfreg/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace svfreg {

namespace {
constexpr int kLeafSize = 8;

inline double sq_dist(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}
}  // namespace

KdTree3::KdTree3(const std::vector<Point3>& points) : points_(points) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) root_ = build(0, static_cast<int>(points_.size()));
}

int KdTree3::build(int begin, int end) {
  Node node;
  if (end - begin <= kLeafSize) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }
  Point3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
  Point3 hi{-lo.x, -lo.y, -lo.z};
  for (int i = begin; i < end; ++i) {
    const Point3& p = points_[order_[i]];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Vec3 extent = hi - lo;
  int axis = 0;
  if (extent.y > extent[axis]) axis = 1;
  if (extent.z > extent[axis]) axis = 2;

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];
  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree3::search(int ni, const Point3& q, std::pair<double, int>& best) const {
  const Node& node = nodes_[ni];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int idx = order_[i];
      const double d = sq_dist(q, points_[idx]);
      if (d < best.first || (d == best.first && idx < best.second)) best = {d, idx};
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, q, best);
  if (diff * diff <= best.first) search(far, q, best);
}

int KdTree3::nearest(const Point3& q, double* sq) const {
  if (empty()) throw ValidationError("nearest query on empty kd-tree");
  std::pair<double, int> best{std::numeric_limits<double>::max(), -1};
  search(root_, q, best);
  if (sq) *sq = best.first;
  return best.second;
}

void KdTree3::search_k(int ni, const Point3& q, std::size_t k,
                       std::vector<std::pair<double, int>>& heap) const {
  const Node& node = nodes_[ni];
  auto worse = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
    return a < b;  // max-heap on (distance, index)
  };
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int idx = order_[i];
      const std::pair<double, int> cand{sq_dist(q, points_[idx]), idx};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), worse);
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end(), worse);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), worse);
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search_k(near, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().first) search_k(far, q, k, heap);
}

std::vector<std::pair<double, int>> KdTree3::knearest(const Point3& q, int k) const {
  std::vector<std::pair<double, int>> heap;
  if (k <= 0 || empty()) return heap;
  heap.reserve(k);
  search_k(root_, q, static_cast<std::size_t>(k), heap);
  std::sort(heap.begin(), heap.end());
  return heap;
}

}  // namespace svfreg
