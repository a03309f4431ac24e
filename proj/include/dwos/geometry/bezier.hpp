#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/rng.hpp"
#include "dwos/geometry/params.hpp"
#include "dwos/geometry/query.hpp"
#include "dwos/geometry/segment_bvh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace dwos {

struct BezierAnchor {
  Vec2 position = Vec2::Zero();
  Vec2 out = Vec2::Zero();       // outgoing handle, relative to position
  std::optional<Vec2> in;        // incoming handle, relative to position; mirrors `out` when absent
  bool colinear = true;          // incoming handle stays on the line of the outgoing one
};

inline Vec2 bezier_point(const std::array<Vec2, 4>& p, double t) {
  const double s = 1.0 - t;
  return s * s * s * p[0] + 3.0 * s * s * t * p[1] + 3.0 * s * t * t * p[2] + t * t * t * p[3];
}

inline Vec2 bezier_d1(const std::array<Vec2, 4>& p, double t) {
  const double s = 1.0 - t;
  return 3.0 * (s * s * (p[1] - p[0]) + 2.0 * s * t * (p[2] - p[1]) + t * t * (p[3] - p[2]));
}

inline Vec2 bezier_d2(const std::array<Vec2, 4>& p, double t) {
  return 6.0 * ((1.0 - t) * (p[0] - 2.0 * p[1] + p[2]) + t * (p[1] - 2.0 * p[2] + p[3]));
}

// Signed curvature x' x x'' / |x'|^3.
inline double bezier_curvature(const std::array<Vec2, 4>& p, double t) {
  const Vec2 d1 = bezier_d1(p, t);
  const double n = d1.norm();
  return n > 0.0 ? cross(d1, bezier_d2(p, t)) / (n * n * n) : 0.0;
}

/// Closed chains of cubic Bézier curves.
///
/// Per anchor the parameters are the position (2), the outgoing handle (2) and, unless the anchor
/// is colinear, the incoming handle (2). A colinear anchor keeps its incoming handle at a fixed
/// negative multiple of the outgoing one, so smoothness survives optimization.
/// Closest-point queries run against a flattening with chord error at most `flatness`.
class BezierChain {
 public:
  static constexpr int dim = 2;
  using Point = Vec2;
  static constexpr double kDefaultFlatness = 1e-5;

  BezierChain() = default;

  BezierChain(const std::vector<BezierAnchor>& anchors, std::vector<std::vector<int>> loops,
              double flatness = kDefaultFlatness)
      : loops_(std::move(loops)), flatness_(flatness) {
    if (loops_.empty()) throw ConfigError("bezier: no loops");
    if (!(flatness_ > 0.0)) throw ConfigError("bezier: flatness must be positive");
    const int n = static_cast<int>(anchors.size());
    std::vector<int> pos_param(n), out_param(n), in_param(n, -1);
    std::vector<double> ratio(n, 1.0);
    for (int i = 0; i < n; ++i) {
      const auto& a = anchors[i];
      const std::string name = "anchor[" + std::to_string(i) + "]";
      pos_param[i] = num_params();
      add_param(name + ".x", "position", 0, a.position.x());
      add_param(name + ".y", "position", 1, a.position.y());
      out_param[i] = num_params();
      add_param(name + ".out.x", "handle", 0, a.out.x());
      add_param(name + ".out.y", "handle", 1, a.out.y());
      const Vec2 in = a.in.value_or(-a.out);
      if (a.colinear) {
        const double lo = a.out.norm();
        if (!(lo > 0.0)) throw ConfigError("bezier: colinear anchor needs a nonzero outgoing handle");
        if (std::abs(cross(in, a.out)) > 1e-9 * lo * std::max(lo, in.norm()) || in.dot(a.out) > 0.0)
          throw ConfigError("bezier: colinear anchor has non-opposite handles");
        ratio[i] = in.norm() / lo;
      } else {
        in_param[i] = num_params();
        add_param(name + ".in.x", "handle", 0, in.x());
        add_param(name + ".in.y", "handle", 1, in.y());
      }
    }
    for (const auto& loop : loops_) {
      if (loop.size() < 2) throw ConfigError("bezier: every loop needs at least 2 anchors");
      const int m = static_cast<int>(loop.size());
      for (int j = 0; j < m; ++j) {
        const int a = loop[j], b = loop[(j + 1) % m];
        if (a < 0 || a >= n || b < 0 || b >= n) throw ConfigError("bezier: anchor index out of range");
        auto pos = [&](int i) { return AffinePoint<2>::free(pos_param[i]); };
        std::array<AffinePoint<2>, 4> c{pos(a), pos(a), pos(b), pos(b)};
        c[1].terms.push_back({out_param[a], Vec2::UnitX()});
        c[1].terms.push_back({out_param[a] + 1, Vec2::UnitY()});
        if (in_param[b] >= 0) {
          c[2].terms.push_back({in_param[b], Vec2::UnitX()});
          c[2].terms.push_back({in_param[b] + 1, Vec2::UnitY()});
        } else {
          c[2].terms.push_back({out_param[b], -ratio[b] * Vec2::UnitX()});
          c[2].terms.push_back({out_param[b] + 1, -ratio[b] * Vec2::UnitY()});
        }
        curves_.push_back({c, a, b});
      }
    }
    anchor_count_ = n;
    rebuild();
    reference_ = controls_;
  }

  int num_params() const { return static_cast<int>(params_.size()); }
  std::span<const double> params() const { return params_; }
  const std::vector<ParamInfo>& layout() const { return layout_; }
  std::uint64_t revision() const { return revision_; }
  double flatness() const { return flatness_; }

  void set_params(std::span<const double> values) {
    check_param_count(values, params_.size(), "bezier");
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

  int num_curves() const { return static_cast<int>(curves_.size()); }
  const std::array<Vec2, 4>& controls(int curve) const { return controls_[curve]; }
  std::pair<int, int> data_anchors(int curve) const { return {curves_[curve].a, curves_[curve].b}; }
  int num_anchors() const { return anchor_count_; }
  int num_pieces() const { return static_cast<int>(pieces_.size()); }
  void reset_reference() { reference_ = controls_; }

  Box2 bounds() const { return bounds_; }
  double perimeter() const { return perimeter_; }

  bool contains(const Vec2& x) const { return inside_even_odd(x, piece_points_); }

  BoundaryQuery<2> closest(const Vec2& x) const {
    if (bvh_.empty()) throw ConfigError("bezier: empty scene");
    const SegmentHit hit = bvh_.closest(x);
    return make_query(x, hit.id, hit.t, std::sqrt(hit.distance_sq));
  }

  // The flattened distance can overestimate the true one by up to `flatness`.
  WalkStep<2> step(const Vec2& x, double epsilon) const {
    BoundaryQuery<2> q = closest(x);
    return {std::max(0.0, q.distance - flatness_), q.distance < epsilon, q};
  }

  PointVelocity<2> point_velocity(const BoundaryQuery<2>& q) const {
    check_revision(q);
    const double t = q.local, s = 1.0 - t;
    const double w[4] = {s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t};
    PointVelocity<2> out;
    for (int j = 0; j < 4; ++j)
      for (const auto& [k, dir] : curves_[q.primitive].controls[j].terms) out.push_back({k, w[j] * dir});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    PointVelocity<2> merged;
    for (const auto& e : out) {
      if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
      else merged.push_back(e);
    }
    return merged;
  }

  NormalVelocity normal_velocity(const BoundaryQuery<2>& q) const { return project_normal(point_velocity(q), q.normal); }

  Vec2 tangent(const BoundaryQuery<2>& q) const { return bezier_d1(controls_[q.primitive], q.local); }
  Vec2 reference_point(const BoundaryQuery<2>& q) const { return bezier_point(reference_[q.primitive], q.local); }
  Vec2 reference_tangent(const BoundaryQuery<2>& q) const { return bezier_d1(reference_[q.primitive], q.local); }

  double curvature(const BoundaryQuery<2>& q) const { return bezier_curvature(controls_[q.primitive], q.local); }

  BoundarySample<2> sample_boundary(CounterRng& rng) const {
    const double u = rng.uniform() * perimeter_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const int id = std::min(static_cast<int>(it - cumulative_.begin()), num_pieces() - 1);
    const double start = id > 0 ? cumulative_[id - 1] : 0.0;
    const double len = cumulative_[id] - start;
    const double s = len > 0.0 ? std::clamp((u - start) / len, 0.0, 1.0) : 0.0;
    BoundarySample<2> out;
    out.query = make_query(Vec2::Zero(), id, s, 0.0);
    out.query.point = out.query.closest;
    out.pdf = 1.0 / perimeter_;
    return out;
  }

 private:
  struct Curve {
    std::array<AffinePoint<2>, 4> controls;
    int a, b;
  };
  struct Piece {
    int curve;
    double t0, t1;
  };

  void add_param(std::string name, const char* role, int component, double value) {
    layout_.push_back({std::move(name), role, component});
    params_.push_back(value);
  }

  void check_revision(const BoundaryQuery<2>& q) const {
    if (q.revision != revision_) throw ConsistencyError("bezier: stale boundary query");
  }

  BoundaryQuery<2> make_query(const Vec2& x, int piece, double s, double distance) const {
    const Piece& p = pieces_[piece];
    BoundaryQuery<2> q;
    q.point = x;
    q.primitive = p.curve;
    q.local = p.t0 + s * (p.t1 - p.t0);
    q.closest = bezier_point(controls_[p.curve], q.local);
    q.distance = distance;
    Vec2 d = bezier_d1(controls_[p.curve], q.local);
    if (!(d.norm() > 1e-14)) d = piece_points_[piece][1] - piece_points_[piece][0];
    q.normal = right_perp(d).normalized();
    q.revision = revision_;
    return q;
  }

  void rebuild() {
    controls_.resize(curves_.size());
    pieces_.clear();
    piece_points_.clear();
    bounds_ = Box2{};
    for (std::size_t c = 0; c < curves_.size(); ++c) {
      auto& p = controls_[c];
      for (int j = 0; j < 4; ++j) p[j] = curves_[c].controls[j].eval(params_);
      if (!((p[3] - p[0]).norm() > 0.0) && !((p[1] - p[0]).norm() > 0.0))
        throw NumericalError("bezier: degenerate curve");
      // Chord error of a uniform piece of parameter length h is at most |B''|_max h^2 / 8.
      const double m = std::max((p[0] - 2.0 * p[1] + p[2]).norm(), (p[1] - 2.0 * p[2] + p[3]).norm());
      const int pieces = std::clamp(static_cast<int>(std::ceil(std::sqrt(6.0 * m / (8.0 * flatness_)))), 1, 1 << 14);
      Vec2 prev = p[0];
      for (int k = 1; k <= pieces; ++k) {
        const double t1 = static_cast<double>(k) / pieces;
        const Vec2 next = k == pieces ? p[3] : bezier_point(p, t1);
        pieces_.push_back({static_cast<int>(c), static_cast<double>(k - 1) / pieces, t1});
        piece_points_.push_back({prev, next});
        bounds_.expand(prev);
        prev = next;
      }
    }
    cumulative_.resize(pieces_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) cumulative_[i] = (acc += (piece_points_[i][1] - piece_points_[i][0]).norm());
    perimeter_ = acc;
    bvh_.build(piece_points_);
  }

  std::vector<std::vector<int>> loops_;
  double flatness_ = kDefaultFlatness;
  int anchor_count_ = 0;
  std::vector<double> params_;
  std::vector<ParamInfo> layout_;
  std::vector<Curve> curves_;

  std::vector<std::array<Vec2, 4>> controls_;
  std::vector<std::array<Vec2, 4>> reference_;
  std::vector<Piece> pieces_;
  std::vector<std::array<Vec2, 2>> piece_points_;
  std::vector<double> cumulative_;
  double perimeter_ = 0.0;
  Box2 bounds_;
  SegmentBVH bvh_;
  std::uint64_t revision_ = 0;
};

}  // namespace dwos
