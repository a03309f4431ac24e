#pragma once

#include "dwos/core/types.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <vector>

namespace dwos {

struct SegmentHit {
  int id = -1;
  double t = 0.0;
  double distance_sq = kInf;
  Vec2 closest = Vec2::Zero();
};

inline SegmentHit closest_on_segment(const Vec2& x, const Vec2& a, const Vec2& b, int id) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  Vec2 p = a + t * ab;
  return {id, t, (x - p).squaredNorm(), p};
}

/// Bounding-volume hierarchy over 2D segments for nearest-segment queries.
/// Ties between equidistant segments resolve to the lowest segment id.
class SegmentBVH {
 public:
  SegmentBVH() = default;

  void build(std::vector<std::array<Vec2, 2>> segments) {
    segs_ = std::move(segments);
    nodes_.clear();
    order_.resize(segs_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!segs_.empty()) build_node(0, static_cast<int>(segs_.size()));
  }

  bool empty() const { return segs_.empty(); }
  std::size_t size() const { return segs_.size(); }
  const std::array<Vec2, 2>& segment(int i) const { return segs_[i]; }

  SegmentHit closest(const Vec2& x) const {
    SegmentHit best;
    if (nodes_.empty()) return best;
    std::array<int, 64> stack;
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& n = nodes_[stack[--top]];
      if (n.box.squared_distance(x) > best.distance_sq) continue;
      if (n.count > 0) {
        for (int i = n.first; i < n.first + n.count; ++i) {
          const int id = order_[i];
          SegmentHit h = closest_on_segment(x, segs_[id][0], segs_[id][1], id);
          if (h.distance_sq < best.distance_sq || (h.distance_sq == best.distance_sq && id < best.id)) best = h;
        }
      } else {
        // Visit the nearer child first.
        const double dl = nodes_[n.left].box.squared_distance(x);
        const double dr = nodes_[n.right].box.squared_distance(x);
        if (dl <= dr) {
          stack[top++] = n.right;
          stack[top++] = n.left;
        } else {
          stack[top++] = n.left;
          stack[top++] = n.right;
        }
      }
    }
    return best;
  }

 private:
  struct Node {
    Box2 box;
    int left = -1, right = -1;
    int first = 0, count = 0;
  };

  int build_node(int first, int last) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    Box2 box, centroids;
    for (int i = first; i < last; ++i) {
      const auto& s = segs_[order_[i]];
      box.expand(s[0]);
      box.expand(s[1]);
      centroids.expand(0.5 * (s[0] + s[1]));
    }
    nodes_[index].box = box;
    if (last - first <= kLeafSize) {
      nodes_[index].first = first;
      nodes_[index].count = last - first;
      return index;
    }
    int axis = 0;
    centroids.extent().maxCoeff(&axis);
    const int mid = (first + last) / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + last, [&](int a, int b) {
      return (segs_[a][0][axis] + segs_[a][1][axis]) < (segs_[b][0][axis] + segs_[b][1][axis]);
    });
    const int l = build_node(first, mid);
    const int r = build_node(mid, last);
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
  }

  static constexpr int kLeafSize = 4;
  std::vector<std::array<Vec2, 2>> segs_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

// Even-odd point-in-region test over a set of closed segments.
template <class SegmentRange>
bool inside_even_odd(const Vec2& x, const SegmentRange& segments) {
  bool inside = false;
  for (const auto& s : segments) {
    const Vec2& a = s[0];
    const Vec2& b = s[1];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xi = a.x() + (x.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x.x() < xi) inside = !inside;
    }
  }
  return inside;
}

}  // namespace dwos
