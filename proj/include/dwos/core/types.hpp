#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dwos {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// 2D scalar cross product.
inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Right-hand perpendicular; for a counter-clockwise loop this points out of the enclosed region.
inline Vec2 right_perp(const Vec2& v) { return {v.y(), -v.x()}; }

template <int Dim>
struct Box {
  Vec<Dim> lo = Vec<Dim>::Constant(kInf);
  Vec<Dim> hi = Vec<Dim>::Constant(-kInf);

  void expand(const Vec<Dim>& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const Box& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool empty() const { return (hi.array() < lo.array()).any(); }
  Vec<Dim> extent() const { return hi - lo; }
  Vec<Dim> center() const { return 0.5 * (lo + hi); }
  double max_side() const { return extent().maxCoeff(); }
  double measure() const { return extent().prod(); }
  bool contains(const Vec<Dim>& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  // Squared distance from p to the box (zero inside).
  double squared_distance(const Vec<Dim>& p) const {
    Vec<Dim> d = (lo - p).cwiseMax(p - hi).cwiseMax(Vec<Dim>::Zero());
    return d.squaredNorm();
  }
};

using Box2 = Box<2>;

}  // namespace dwos
