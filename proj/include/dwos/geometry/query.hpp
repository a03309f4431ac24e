#pragma once

#include "dwos/core/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace dwos {

/// Result of a closest-point query against the boundary.
template <int Dim>
struct BoundaryQuery {
  Vec<Dim> point = Vec<Dim>::Zero();    // query location x
  Vec<Dim> closest = Vec<Dim>::Zero();  // nearest boundary point
  double distance = kInf;
  Vec<Dim> normal = Vec<Dim>::Zero();   // outward unit normal at `closest`
  int primitive = -1;                   // segment / curve / sphere id
  double local = 0.0;                   // curve parameter in [0, 1]
  std::uint64_t revision = 0;           // geometry revision the query was computed against
};

/// One walk-on-spheres step: the radius of a ball that is guaranteed to be boundary-free, and
/// whether the walk is inside the termination shell. `query` always carries the nearest boundary
/// point for explicit boundaries; for implicit ones only when `terminated` is set.
template <int Dim>
struct WalkStep {
  double radius = 0.0;
  bool terminated = false;
  BoundaryQuery<Dim> query;
};

template <int Dim>
struct BoundarySample {
  BoundaryQuery<Dim> query;  // query.closest is the sample, query.point == query.closest
  double pdf = 0.0;          // with respect to boundary length / area
};

// d(boundary point)/d(param k) at a boundary location, in parameter-index order.
template <int Dim>
using PointVelocity = std::vector<std::pair<int, Vec<Dim>>>;

// v_n(x; e_k) per parameter k, zero entries omitted.
using NormalVelocity = std::vector<std::pair<int, double>>;

template <int Dim>
NormalVelocity project_normal(const PointVelocity<Dim>& v, const Vec<Dim>& n) {
  NormalVelocity out;
  out.reserve(v.size());
  for (const auto& [k, dir] : v) {
    const double s = n.dot(dir);
    if (s != 0.0) out.push_back({k, s});
  }
  return out;
}

}  // namespace dwos
