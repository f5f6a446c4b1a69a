#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"

namespace nsm {

/**
 * @brief Balanced k-d tree over fixed-width rows (3-D points or descriptors).
 *
 * Queries reproduce a brute-force scan exactly: squared distances are
 * accumulated in dimension order, k-NN results are ordered by
 * (distance, insertion index) and radius results contain every row with
 * squared distance <= r^2.
 */
class KdTree {
 public:
  struct Neighbor {
    std::size_t id;
    double distance;
  };

  KdTree() = default;

  /// `rows` is row-major with `dim` columns per row.
  KdTree(std::vector<double> rows, std::size_t dim) : data_(std::move(rows)), dim_(dim) {
    if (dim_ == 0) throw ValidationError("KdTree: dimension must be positive");
    if (data_.size() % dim_ != 0) throw ValidationError("KdTree: row buffer is not a multiple of dim");
    size_ = data_.size() / dim_;
    build();
  }

  static KdTree from_points(std::span<const Point> points) {
    std::vector<double> rows;
    rows.reserve(points.size() * 3);
    for (const auto& p : points) rows.insert(rows.end(), {p.x(), p.y(), p.z()});
    return KdTree(std::move(rows), 3);
  }

  std::size_t size() const { return size_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return size_ == 0; }

  std::span<const double> row(std::size_t id) const { return {data_.data() + id * dim_, dim_}; }

  /// min(k, size()) nearest rows, ascending by distance then id.
  std::vector<Neighbor> knn(std::span<const double> query, std::size_t k) const {
    if (empty()) throw ValidationError("KdTree::knn on empty index");
    if (k == 0) throw ValidationError("KdTree::knn requires k >= 1");
    check_query(query);
    k = std::min(k, size_);
    Heap heap;
    knn_recurse(0, query, k, heap);
    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
      out[i] = {heap.top().second, std::sqrt(heap.top().first)};
      heap.pop();
    }
    return out;
  }

  std::vector<Neighbor> knn(const Point& q, std::size_t k) const {
    const double buf[3] = {q.x(), q.y(), q.z()};
    return knn(std::span<const double>(buf, 3), k);
  }

  /// Ids of all rows within distance r (inclusive), ascending by id.
  std::vector<std::size_t> radius(std::span<const double> query, double r) const {
    if (!(r > 0.0)) throw ValidationError("KdTree::radius requires r > 0");
    std::vector<std::size_t> out;
    if (empty()) return out;
    check_query(query);
    radius_recurse(0, query, r * r, out);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<std::size_t> radius(const Point& q, double r) const {
    const double buf[3] = {q.x(), q.y(), q.z()};
    return radius(std::span<const double>(buf, 3), r);
  }

  /// Same accumulation order as the tree uses internally.
  static double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
      const double diff = a[d] - b[d];
      s += diff * diff;
    }
    return s;
  }

 private:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t axis = 0;
    double split = 0.0;
    bool leaf() const { return left < 0; }
  };

  // Max-heap on (squared distance, id): top is the current worst neighbour.
  using Entry = std::pair<double, std::size_t>;
  using Heap = std::priority_queue<Entry>;

  void check_query(std::span<const double> q) const {
    if (q.size() != dim_) throw ValidationError("KdTree: query dimension mismatch");
  }

  double coord(std::size_t id, std::size_t axis) const { return data_[id * dim_ + axis]; }

  void build() {
    order_.resize(size_);
    for (std::size_t i = 0; i < size_; ++i) order_[i] = static_cast<std::uint32_t>(i);
    nodes_.clear();
    if (size_ > 0) {
      nodes_.reserve(2 * (size_ / kLeafSize + 1));
      build_node(0, size_);
    }
  }

  std::int32_t build_node(std::size_t begin, std::size_t end) {
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end)});
    if (end - begin <= kLeafSize) return index;

    // Split on the axis of widest spread.
    std::size_t axis = 0;
    double best_spread = -1.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t i = begin; i < end; ++i) {
        const double v = coord(order_[i], d);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        axis = d;
      }
    }
    if (best_spread <= 0.0) return index;  // all rows identical: keep as leaf

    const std::size_t mid = begin + (end - begin) / 2;
    auto less = [&](std::uint32_t a, std::uint32_t b) {
      const double va = coord(a, axis), vb = coord(b, axis);
      return va < vb || (va == vb && a < b);
    };
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), less);
    const double split = coord(order_[mid], axis);

    const std::int32_t left = build_node(begin, mid);
    const std::int32_t right = build_node(mid, end);
    Node& n = nodes_[static_cast<std::size_t>(index)];
    n.axis = static_cast<std::uint32_t>(axis);
    n.split = split;
    n.left = left;
    n.right = right;
    return index;
  }

  void knn_recurse(std::int32_t node_index, std::span<const double> q, std::size_t k, Heap& heap) const {
    const Node& n = nodes_[static_cast<std::size_t>(node_index)];
    if (n.leaf()) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::size_t id = order_[i];
        const double d2 = squared_distance(q, row(id));
        if (heap.size() < k) {
          heap.emplace(d2, id);
        } else if (Entry(d2, id) < heap.top()) {
          heap.pop();
          heap.emplace(d2, id);
        }
      }
      return;
    }
    // Left subtree holds coord <= split, right holds coord >= split.
    const double diff = q[n.axis] - n.split;
    const std::int32_t near = diff <= 0.0 ? n.left : n.right;
    const std::int32_t far = diff <= 0.0 ? n.right : n.left;
    knn_recurse(near, q, k, heap);
    // Visit the far side whenever it may hold an equal-distance row with a smaller id.
    if (heap.size() < k || diff * diff <= heap.top().first) knn_recurse(far, q, k, heap);
  }

  void radius_recurse(std::int32_t node_index, std::span<const double> q, double r2,
                      std::vector<std::size_t>& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(node_index)];
    if (n.leaf()) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::size_t id = order_[i];
        if (squared_distance(q, row(id)) <= r2) out.push_back(id);
      }
      return;
    }
    const double diff = q[n.axis] - n.split;
    if (diff <= 0.0 || diff * diff <= r2) radius_recurse(n.left, q, r2, out);
    if (diff >= 0.0 || diff * diff <= r2) radius_recurse(n.right, q, r2, out);
  }

  std::vector<double> data_;
  std::size_t dim_ = 0;
  std::size_t size_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace nsm
