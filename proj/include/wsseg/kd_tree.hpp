#ifndef WSSEG_KD_TREE_HPP
#define WSSEG_KD_TREE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace wsseg {

struct Neighbor {
  Eigen::Index index;
  double squared_distance;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.squared_distance < b.squared_distance ||
           (a.squared_distance == b.squared_distance && a.index < b.index);
  }
  friend bool operator==(const Neighbor& a, const Neighbor& b) {
    return a.index == b.index && a.squared_distance == b.squared_distance;
  }
};

// Exact k-d tree over the columns of a Dim x N matrix. Results are ordered
// by (distance, index), so equidistant points come back lowest index first.
// Immutable after construction; queries are safe from multiple threads.
template <int Dim>
class KdTree {
 public:
  using Points = Eigen::Matrix<double, Dim, Eigen::Dynamic>;
  using Point = Eigen::Matrix<double, Dim, 1>;

  KdTree() = default;

  explicit KdTree(Points points, int leaf_size = 12)
      : points_(std::move(points)), leaf_size_(std::max(1, leaf_size)) {
    order_.resize(static_cast<std::size_t>(points_.cols()));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    if (!order_.empty()) {
      nodes_.reserve(2 * order_.size() / static_cast<std::size_t>(leaf_size_) + 1);
      build(0, static_cast<Eigen::Index>(order_.size()));
    }
  }

  Eigen::Index size() const { return points_.cols(); }
  const Points& points() const { return points_; }

  std::vector<Neighbor> k_nearest(const Point& query, Eigen::Index k) const {
    k = std::min(k, size());
    std::vector<Neighbor> result;
    if (k <= 0) return result;
    std::priority_queue<Neighbor> heap;  // max-heap on (distance, index)
    search_knn(0, query, k, heap);
    result.resize(heap.size());
    for (auto i = static_cast<std::ptrdiff_t>(heap.size()) - 1; i >= 0; --i) {
      result[static_cast<std::size_t>(i)] = heap.top();
      heap.pop();
    }
    return result;
  }

  // All points with distance <= radius, sorted.
  std::vector<Neighbor> radius_search(const Point& query, double radius) const {
    std::vector<Neighbor> result;
    if (size() == 0 || radius < 0.0) return result;
    search_radius(0, query, radius * radius, result);
    std::sort(result.begin(), result.end());
    return result;
  }

 private:
  struct Node {
    Eigen::Index begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
    Point lo, hi;  // bounding box of the node's points
  };

  std::int32_t build(Eigen::Index begin, Eigen::Index end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    Node node;
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    Point lo = Point::Constant(std::numeric_limits<double>::infinity());
    Point hi = -lo;
    for (Eigen::Index i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_.col(order_[i]));
      hi = hi.cwiseMax(points_.col(order_[i]));
    }
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;
    if (end - begin <= leaf_size_) return id;

    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const Eigen::Index mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end, [&](Eigen::Index a, Eigen::Index b) {
                       return points_(axis, a) < points_(axis, b);
                     });
    nodes_[id].axis = axis;
    nodes_[id].split = points_(axis, order_[mid]);
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  static double box_distance(const Node& node, const Point& q) {
    const Point d = (node.lo - q).cwiseMax(q - node.hi).cwiseMax(0.0);
    return d.squaredNorm();
  }

  void search_knn(std::int32_t id, const Point& q, Eigen::Index k,
                  std::priority_queue<Neighbor>& heap) const {
    const Node& node = nodes_[id];
    // Prune only on strictly larger distance so equidistant lower indices
    // are still reachable.
    if (static_cast<Eigen::Index>(heap.size()) == k &&
        box_distance(node, q) > heap.top().squared_distance)
      return;
    if (node.axis < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const Eigen::Index idx = order_[i];
        const Neighbor cand{idx, (points_.col(idx) - q).squaredNorm()};
        if (static_cast<Eigen::Index>(heap.size()) < k) {
          heap.push(cand);
        } else if (cand < heap.top()) {
          heap.pop();
          heap.push(cand);
        }
      }
      return;
    }
    const bool go_left = q[node.axis] < node.split;
    search_knn(go_left ? node.left : node.right, q, k, heap);
    search_knn(go_left ? node.right : node.left, q, k, heap);
  }

  void search_radius(std::int32_t id, const Point& q, double r2,
                     std::vector<Neighbor>& out) const {
    const Node& node = nodes_[id];
    if (box_distance(node, q) > r2) return;
    if (node.axis < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const Eigen::Index idx = order_[i];
        const double d2 = (points_.col(idx) - q).squaredNorm();
        if (d2 <= r2) out.push_back({idx, d2});
      }
      return;
    }
    search_radius(node.left, q, r2, out);
    search_radius(node.right, q, r2, out);
  }

  Points points_;
  int leaf_size_ = 12;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
};

using SpatialIndex = KdTree<3>;

struct PointCloud;
SpatialIndex build_index(const PointCloud& cloud);

}  // namespace wsseg

#endif  // WSSEG_KD_TREE_HPP
