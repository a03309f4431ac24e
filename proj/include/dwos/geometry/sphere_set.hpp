#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/rng.hpp"
#include "dwos/geometry/params.hpp"
#include "dwos/geometry/query.hpp"
#include "dwos/kernels/ball_kernel.hpp"
#include "dwos/kernels/sampling.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace dwos {

struct Sphere {
  std::vector<double> center;
  double radius = 1.0;
  bool hole = false;  // normal points into the sphere; the domain is outside it
};

/// Nested circles (2D) or spheres (3D): the domain is inside every solid sphere and outside every
/// hole. Each sphere contributes Dim center parameters followed by one radius parameter.
template <int Dim>
class SphereSet {
 public:
  static constexpr int dim = Dim;
  using Point = Vec<Dim>;

  SphereSet() = default;
  explicit SphereSet(const std::vector<Sphere>& spheres) {
    if (spheres.empty()) throw ConfigError("sphere set: no spheres");
    for (std::size_t i = 0; i < spheres.size(); ++i) {
      const auto& s = spheres[i];
      if (static_cast<int>(s.center.size()) != Dim) throw ConfigError("sphere set: center has wrong dimension");
      for (int c = 0; c < Dim; ++c) {
        params_.push_back(s.center[c]);
        layout_.push_back({"sphere[" + std::to_string(i) + "].center." + "xyz"[c], "position", c});
      }
      params_.push_back(s.radius);
      layout_.push_back({"sphere[" + std::to_string(i) + "].radius", "radius", 0});
      holes_.push_back(s.hole);
    }
    unpack();
  }

  int num_params() const { return static_cast<int>(params_.size()); }
  std::span<const double> params() const { return params_; }
  const std::vector<ParamInfo>& layout() const { return layout_; }
  std::uint64_t revision() const { return revision_; }
  int size() const { return static_cast<int>(holes_.size()); }
  Vec<Dim> center(int i) const { return centers_[i]; }
  double radius(int i) const { return radii_[i]; }
  bool hole(int i) const { return holes_[i]; }

  void set_params(std::span<const double> values) {
    check_param_count(values, params_.size(), "sphere set");
    std::vector<double> old = params_;
    params_.assign(values.begin(), values.end());
    try {
      unpack();
    } catch (...) {
      params_ = std::move(old);
      unpack();
      throw;
    }
    ++revision_;
  }

  Box<Dim> bounds() const {
    Box<Dim> b;
    for (int i = 0; i < size(); ++i) {
      if (holes_[i]) continue;
      b.expand(centers_[i] - Vec<Dim>::Constant(radii_[i]));
      b.expand(centers_[i] + Vec<Dim>::Constant(radii_[i]));
    }
    return b;
  }

  bool contains(const Vec<Dim>& x) const {
    for (int i = 0; i < size(); ++i) {
      const double r = (x - centers_[i]).norm();
      if (holes_[i] ? r <= radii_[i] : r >= radii_[i]) return false;
    }
    return true;
  }

  BoundaryQuery<Dim> closest(const Vec<Dim>& x) const {
    BoundaryQuery<Dim> q;
    q.point = x;
    for (int i = 0; i < size(); ++i) {
      Vec<Dim> d = x - centers_[i];
      const double r = d.norm();
      const double dist = std::abs(r - radii_[i]);
      if (dist < q.distance) {
        const Vec<Dim> dir = r > 0.0 ? Vec<Dim>(d / r) : Vec<Dim>::Unit(0);
        q.distance = dist;
        q.closest = centers_[i] + radii_[i] * dir;
        q.normal = holes_[i] ? Vec<Dim>(-dir) : dir;
        q.primitive = i;
      }
    }
    q.revision = revision_;
    return q;
  }

  WalkStep<Dim> step(const Vec<Dim>& x, double epsilon) const {
    BoundaryQuery<Dim> q = closest(x);
    return {q.distance, q.distance < epsilon, q};
  }

  PointVelocity<Dim> point_velocity(const BoundaryQuery<Dim>& q) const {
    check_revision(q);
    const int i = q.primitive;
    const int first = i * (Dim + 1);
    PointVelocity<Dim> out;
    for (int c = 0; c < Dim; ++c) out.push_back({first + c, Vec<Dim>::Unit(c)});
    out.push_back({first + Dim, (q.closest - centers_[i]) / radii_[i]});
    return out;
  }

  NormalVelocity normal_velocity(const BoundaryQuery<Dim>& q) const { return project_normal(point_velocity(q), q.normal); }

  // Sum of principal curvatures; negative on holes.
  double curvature(const BoundaryQuery<Dim>& q) const {
    const double k = (Dim - 1) / radii_[q.primitive];
    return holes_[q.primitive] ? -k : k;
  }

  double perimeter() const {
    double total = 0.0;
    for (int i = 0; i < size(); ++i) total += sphere_measure<Dim>(radii_[i]);
    return total;
  }

  BoundarySample<Dim> sample_boundary(CounterRng& rng) const {
    const double total = perimeter();
    double u = rng.uniform() * total;
    int i = 0;
    for (; i + 1 < size(); ++i) {
      const double m = sphere_measure<Dim>(radii_[i]);
      if (u < m) break;
      u -= m;
    }
    const Vec<Dim> dir = sample_unit_sphere<Dim>(rng);
    BoundarySample<Dim> out;
    out.query.closest = centers_[i] + radii_[i] * dir;
    out.query.point = out.query.closest;
    out.query.distance = 0.0;
    out.query.normal = holes_[i] ? Vec<Dim>(-dir) : dir;
    out.query.primitive = i;
    out.query.revision = revision_;
    out.pdf = 1.0 / total;
    return out;
  }

 private:
  void check_revision(const BoundaryQuery<Dim>& q) const {
    if (q.revision != revision_) throw ConsistencyError("sphere set: stale boundary query");
  }

  void unpack() {
    centers_.resize(holes_.size());
    radii_.resize(holes_.size());
    for (int i = 0; i < size(); ++i) {
      for (int c = 0; c < Dim; ++c) centers_[i][c] = params_[i * (Dim + 1) + c];
      radii_[i] = params_[i * (Dim + 1) + Dim];
      if (!(radii_[i] > 0.0)) throw NumericalError("sphere set: radius must be positive");
    }
  }

  std::vector<double> params_;
  std::vector<ParamInfo> layout_;
  std::vector<bool> holes_;
  std::vector<Vec<Dim>> centers_;
  std::vector<double> radii_;
  std::uint64_t revision_ = 0;
};

}  // namespace dwos
