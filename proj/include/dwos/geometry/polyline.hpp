#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/rng.hpp"
#include "dwos/geometry/params.hpp"
#include "dwos/geometry/query.hpp"
#include "dwos/geometry/segment_bvh.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dwos {

/// Closed polygonal boundary in 2D.
///
/// Vertices are affine functions of the parameter vector, which covers both free vertex
/// coordinates and rigid translations. The domain lies to the left of every edge: outer loops run
/// counter-clockwise, holes clockwise.
class Polyline {
 public:
  static constexpr int dim = 2;
  using Point = Vec2;

  Polyline() = default;

  Polyline(std::vector<AffinePoint<2>> vertices, std::vector<std::vector<int>> loops, std::vector<double> params,
           std::vector<ParamInfo> layout)
      : vertices_(std::move(vertices)), loops_(std::move(loops)), params_(std::move(params)), layout_(std::move(layout)) {
    if (loops_.empty()) throw ConfigError("polyline: no loops");
    check_param_count(params_, layout_.size(), "polyline");
    for (const auto& loop : loops_) {
      if (loop.size() < 3) throw ConfigError("polyline: every loop needs at least 3 vertices");
      for (int v : loop)
        if (v < 0 || v >= static_cast<int>(vertices_.size())) throw ConfigError("polyline: vertex index out of range");
    }
    for (const auto& v : vertices_)
      for (const auto& [k, dir] : v.terms)
        if (k < 0 || k >= num_params()) throw ConfigError("polyline: parameter index out of range");
    rebuild();
    reference_ = positions_;
  }

  // Every vertex coordinate is a parameter: vertex i -> (2i, 2i+1).
  static Polyline with_vertex_params(const std::vector<Vec2>& points, std::vector<std::vector<int>> loops) {
    std::vector<AffinePoint<2>> verts;
    std::vector<double> params;
    std::vector<ParamInfo> layout;
    for (std::size_t i = 0; i < points.size(); ++i) {
      verts.push_back(AffinePoint<2>::free(static_cast<int>(2 * i)));
      for (int c = 0; c < 2; ++c) {
        params.push_back(points[i][c]);
        layout.push_back({"vertex[" + std::to_string(i) + "]." + (c ? "y" : "x"), "position", c});
      }
    }
    return Polyline(std::move(verts), std::move(loops), std::move(params), std::move(layout));
  }

  // Rigid shape with a two-component translation parameter.
  static Polyline with_translation(const std::vector<Vec2>& points, std::vector<std::vector<int>> loops,
                                   Vec2 translation = Vec2::Zero()) {
    std::vector<AffinePoint<2>> verts;
    for (const auto& p : points) verts.push_back({p, {{0, Vec2::UnitX()}, {1, Vec2::UnitY()}}});
    return Polyline(std::move(verts), std::move(loops), {translation.x(), translation.y()},
                    {{"translation.x", "translation", 0}, {"translation.y", "translation", 1}});
  }

  // Single counter-clockwise loop through all points.
  static std::vector<std::vector<int>> single_loop(std::size_t n) {
    std::vector<int> loop(n);
    for (std::size_t i = 0; i < n; ++i) loop[i] = static_cast<int>(i);
    return {loop};
  }

  int num_params() const { return static_cast<int>(params_.size()); }
  std::span<const double> params() const { return params_; }
  const std::vector<ParamInfo>& layout() const { return layout_; }
  std::uint64_t revision() const { return revision_; }

  void set_params(std::span<const double> values) {
    check_param_count(values, params_.size(), "polyline");
    std::vector<double> old = params_;
    params_.assign(values.begin(), values.end());
    try {
      rebuild();
    } catch (...) {
      params_ = std::move(old);
      rebuild();
      throw;
    }
    ++revision_;
  }

  const std::vector<Vec2>& positions() const { return positions_; }
  const std::vector<AffinePoint<2>>& vertices() const { return vertices_; }
  const std::vector<std::vector<int>>& loops() const { return loops_; }
  int num_segments() const { return static_cast<int>(segments_.size()); }
  // Vertex indices (a, b) of a segment; also the data anchors for vertex-valued boundary data.
  std::pair<int, int> data_anchors(int segment) const { return {segments_[segment].a, segments_[segment].b}; }
  int num_anchors() const { return static_cast<int>(vertices_.size()); }

  // Current positions become the reference embedding used by texture-style boundary data.
  void reset_reference() { reference_ = positions_; }
  void set_reference(std::vector<Vec2> reference) { reference_ = std::move(reference); }

  // Parameter index of the x coordinate of a free vertex, or -1 if the vertex is not free.
  int free_vertex_param(int v) const {
    const auto& t = vertices_[v].terms;
    if (t.size() != 2 || vertices_[v].base != Vec2::Zero()) return -1;
    if (t[0].second != Vec2::UnitX() || t[1].second != Vec2::UnitY() || t[1].first != t[0].first + 1) return -1;
    return t[0].first;
  }
  bool has_vertex_params() const {
    for (int v = 0; v < static_cast<int>(vertices_.size()); ++v)
      if (free_vertex_param(v) < 0) return false;
    return true;
  }

  /// One umbrella pass over the gradient of free vertices: g_i <- (1 - w) g_i + w (g_prev + g_next) / 2.
  void smooth_gradient(std::span<double> grad, double weight) const {
    const std::vector<double> g(grad.begin(), grad.end());
    for (int v = 0; v < static_cast<int>(vertices_.size()); ++v) {
      const int k = free_vertex_param(v);
      const int a = free_vertex_param(vertex_edges_[v].first), b = free_vertex_param(vertex_edges_[v].second);
      if (k < 0 || a < 0 || b < 0) continue;
      for (int c = 0; c < 2; ++c) grad[k + c] = (1.0 - weight) * g[k + c] + 0.5 * weight * (g[a + c] + g[b + c]);
    }
  }

  /// Free-vertex copy with every loop resampled to (nearly) uniform edge length `spacing`.
  Polyline resampled(double spacing) const {
    if (!has_vertex_params()) throw ConfigError("polyline: resampling needs free vertex parameters");
    if (!(spacing > 0.0)) throw ConfigError("polyline: resampling spacing must be positive");
    std::vector<Vec2> pts;
    std::vector<std::vector<int>> loops;
    for (const auto& loop : loops_) {
      const int n = static_cast<int>(loop.size());
      std::vector<double> cum(n + 1, 0.0);
      for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + (positions_[loop[(i + 1) % n]] - positions_[loop[i]]).norm();
      const int m = std::max(3, static_cast<int>(std::lround(cum[n] / spacing)));
      std::vector<int> out;
      int seg = 0;
      for (int j = 0; j < m; ++j) {
        const double s = cum[n] * j / m;
        while (seg + 1 < n && cum[seg + 1] <= s) ++seg;
        const double t = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
        out.push_back(static_cast<int>(pts.size()));
        pts.push_back((1.0 - t) * positions_[loop[seg]] + t * positions_[loop[(seg + 1) % n]]);
      }
      loops.push_back(std::move(out));
    }
    return with_vertex_params(pts, std::move(loops));
  }

  double mean_edge_length() const { return perimeter_ / static_cast<double>(segments_.size()); }

  Box2 bounds() const { return bounds_; }
  double perimeter() const { return perimeter_; }

  bool contains(const Vec2& x) const { return inside_even_odd(x, seg_points_); }

  BoundaryQuery<2> closest(const Vec2& x) const {
    if (bvh_.empty()) throw ConfigError("polyline: empty scene");
    SegmentHit hit = bvh_.closest(x);
    BoundaryQuery<2> q;
    q.point = x;
    q.closest = hit.closest;
    q.distance = std::sqrt(hit.distance_sq);
    q.primitive = hit.id;
    q.local = hit.t;
    q.normal = segments_[hit.id].normal;
    q.revision = revision_;
    return q;
  }

  WalkStep<2> step(const Vec2& x, double epsilon) const {
    BoundaryQuery<2> q = closest(x);
    return {q.distance, q.distance < epsilon, q};
  }

  PointVelocity<2> point_velocity(const BoundaryQuery<2>& q) const {
    check_revision(q);
    const Segment& s = segments_[q.primitive];
    PointVelocity<2> out;
    auto add = [&](int vertex, double w) {
      if (w == 0.0) return;
      for (const auto& [k, dir] : vertices_[vertex].terms) out.push_back({k, w * dir});
    };
    add(s.a, 1.0 - q.local);
    add(s.b, q.local);
    merge_by_param(out);
    return out;
  }

  NormalVelocity normal_velocity(const BoundaryQuery<2>& q) const { return project_normal(point_velocity(q), q.normal); }

  // d(boundary point)/d(local coordinate).
  Vec2 tangent(const BoundaryQuery<2>& q) const {
    const Segment& s = segments_[q.primitive];
    return positions_[s.b] - positions_[s.a];
  }
  Vec2 reference_point(const BoundaryQuery<2>& q) const {
    const Segment& s = segments_[q.primitive];
    return (1.0 - q.local) * reference_[s.a] + q.local * reference_[s.b];
  }
  Vec2 reference_tangent(const BoundaryQuery<2>& q) const {
    const Segment& s = segments_[q.primitive];
    return reference_[s.b] - reference_[s.a];
  }

  /// Discrete curvature: the turning angle at the nearer segment endpoint divided by the mean of
  /// the two adjacent edge lengths. Positive at convex corners.
  double curvature(const BoundaryQuery<2>& q) const {
    const Segment& s = segments_[q.primitive];
    const int v = q.local < 0.5 ? s.a : s.b;
    const auto& [prev, next] = vertex_edges_[v];
    const Vec2 e0 = positions_[v] - positions_[prev];
    const Vec2 e1 = positions_[next] - positions_[v];
    const double angle = std::atan2(cross(e0, e1), e0.dot(e1));
    return angle / (0.5 * (e0.norm() + e1.norm()));
  }

  BoundarySample<2> sample_boundary(CounterRng& rng) const {
    const double u = rng.uniform() * perimeter_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    int id = std::min(static_cast<int>(it - cumulative_.begin()), num_segments() - 1);
    const double start = id > 0 ? cumulative_[id - 1] : 0.0;
    const double t = std::clamp((u - start) / segments_[id].length, 0.0, 1.0);
    BoundarySample<2> out;
    auto& q = out.query;
    q.closest = (1.0 - t) * positions_[segments_[id].a] + t * positions_[segments_[id].b];
    q.point = q.closest;
    q.distance = 0.0;
    q.normal = segments_[id].normal;
    q.primitive = id;
    q.local = t;
    q.revision = revision_;
    out.pdf = 1.0 / perimeter_;
    return out;
  }

 private:
  struct Segment {
    int a, b;
    double length;
    Vec2 normal;
  };

  void check_revision(const BoundaryQuery<2>& q) const {
    if (q.revision != revision_) throw ConsistencyError("polyline: stale boundary query");
  }

  static void merge_by_param(PointVelocity<2>& v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    PointVelocity<2> merged;
    for (const auto& e : v) {
      if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
      else merged.push_back(e);
    }
    v = std::move(merged);
  }

  void rebuild() {
    positions_.resize(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i) positions_[i] = vertices_[i].eval(params_);
    segments_.clear();
    seg_points_.clear();
    vertex_edges_.assign(vertices_.size(), {0, 0});
    bounds_ = Box2{};
    for (const auto& loop : loops_) {
      const int n = static_cast<int>(loop.size());
      for (int i = 0; i < n; ++i) {
        const int a = loop[i], b = loop[(i + 1) % n];
        const Vec2 d = positions_[b] - positions_[a];
        const double len = d.norm();
        if (!(len > 0.0)) throw NumericalError("polyline: degenerate (zero-length) segment");
        segments_.push_back({a, b, len, right_perp(d) / len});
        seg_points_.push_back({positions_[a], positions_[b]});
        vertex_edges_[b] = {a, loop[(i + 2) % n]};
        bounds_.expand(positions_[a]);
      }
    }
    cumulative_.resize(segments_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) cumulative_[i] = (acc += segments_[i].length);
    perimeter_ = acc;
    bvh_.build(seg_points_);
  }

  std::vector<AffinePoint<2>> vertices_;
  std::vector<std::vector<int>> loops_;
  std::vector<double> params_;
  std::vector<ParamInfo> layout_;

  std::vector<Vec2> positions_;
  std::vector<Vec2> reference_;
  std::vector<Segment> segments_;
  std::vector<std::array<Vec2, 2>> seg_points_;
  std::vector<std::pair<int, int>> vertex_edges_;  // (previous, next) vertex per vertex
  std::vector<double> cumulative_;
  double perimeter_ = 0.0;
  Box2 bounds_;
  SegmentBVH bvh_;
  std::uint64_t revision_ = 0;
};

}  // namespace dwos
