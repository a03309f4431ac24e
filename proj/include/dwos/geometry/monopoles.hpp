#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/rng.hpp"
#include "dwos/geometry/params.hpp"
#include "dwos/geometry/query.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace dwos {

struct Monopole {
  double scale = 1.0;
  std::vector<double> position;
};

/// Implicit boundary h(x) = c + sum_n a_n / |x - p_n| = 0, domain {h > 0}.
///
/// Parameters: c first, then (a_n, p_n) per pole. The kernel is harmonic in 3D away from the poles;
/// in 2D the field is read as a planar slice of that 3D function, so 3D Harnack bounds still give
/// zero-free disks. `box` fixes the scene extent since the zero set is not known in advance.
template <int Dim>
class ImplicitMonopoles {
 public:
  static constexpr int dim = Dim;
  using Point = Vec<Dim>;

  struct Eval {
    double h = 0.0;
    Vec<Dim> grad = Vec<Dim>::Zero();
    double min_pole_distance = kInf;
  };

  ImplicitMonopoles() = default;
  ImplicitMonopoles(double offset, const std::vector<Monopole>& poles, Box<Dim> box) : box_(box) {
    if (poles.empty()) throw ConfigError("monopoles: no poles");
    if (box_.empty()) throw ConfigError("monopoles: bounds required");
    params_.push_back(offset);
    layout_.push_back({"offset", "offset", 0});
    for (std::size_t i = 0; i < poles.size(); ++i) {
      if (static_cast<int>(poles[i].position.size()) != Dim) throw ConfigError("monopoles: position has wrong dimension");
      const std::string name = "pole[" + std::to_string(i) + "]";
      params_.push_back(poles[i].scale);
      layout_.push_back({name + ".scale", "scale", 0});
      for (int c = 0; c < Dim; ++c) {
        params_.push_back(poles[i].position[c]);
        layout_.push_back({name + ".position." + "xyz"[c], "position", c});
      }
    }
    exclusion_ = 1e-6 * box_.max_side();
  }

  int num_params() const { return static_cast<int>(params_.size()); }
  std::span<const double> params() const { return params_; }
  const std::vector<ParamInfo>& layout() const { return layout_; }
  std::uint64_t revision() const { return revision_; }
  int num_poles() const { return (num_params() - 1) / (Dim + 1); }
  double offset() const { return params_[0]; }
  double scale(int n) const { return params_[1 + n * (Dim + 1)]; }
  Vec<Dim> pole(int n) const {
    Vec<Dim> p;
    for (int c = 0; c < Dim; ++c) p[c] = params_[2 + n * (Dim + 1) + c];
    return p;
  }
  double exclusion_radius() const { return exclusion_; }

  void set_params(std::span<const double> values) {
    check_param_count(values, params_.size(), "monopoles");
    for (double v : values)
      if (!std::isfinite(v)) throw NumericalError("monopoles: non-finite parameter");
    params_.assign(values.begin(), values.end());
    ++revision_;
  }

  Box<Dim> bounds() const { return box_; }

  Eval evaluate(const Vec<Dim>& x) const {
    Eval e;
    e.h = offset();
    for (int n = 0; n < num_poles(); ++n) {
      const Vec<Dim> d = x - pole(n);
      const double r = d.norm();
      e.min_pole_distance = std::min(e.min_pole_distance, r);
      if (r < exclusion_) throw SingularityError("monopoles: evaluation within pole exclusion radius");
      e.h += scale(n) / r;
      e.grad -= scale(n) / (r * r * r) * d;
    }
    return e;
  }

  double value(const Vec<Dim>& x) const { return evaluate(x).h; }
  bool contains(const Vec<Dim>& x) const {
    for (int n = 0; n < num_poles(); ++n)
      if ((x - pole(n)).norm() < exclusion_) return scale(n) > 0.0;
    return value(x) > 0.0;
  }

  // Hessian of h.
  Eigen::Matrix<double, Dim, Dim> hessian(const Vec<Dim>& x) const {
    Eigen::Matrix<double, Dim, Dim> H = Eigen::Matrix<double, Dim, Dim>::Zero();
    for (int n = 0; n < num_poles(); ++n) {
      const Vec<Dim> d = x - pole(n);
      const double r = d.norm();
      H += scale(n) * (3.0 * d * d.transpose() / std::pow(r, 5) - Eigen::Matrix<double, Dim, Dim>::Identity() / std::pow(r, 3));
    }
    return H;
  }

  /// Conservative empty-ball radius: the larger of an interval bound on h over the ball and a
  /// Harnack bound for h minus its lower bound on a pole-free ball.
  WalkStep<Dim> step(const Vec<Dim>& x, double epsilon) const {
    const Eval e = evaluate(x);
    const double g = e.grad.norm();
    WalkStep<Dim> out;
    if (std::abs(e.h) < g * epsilon) {
      out.terminated = true;
      out.query = project(x, e);
      return out;
    }
    out.radius = std::max(interval_radius(x, e), harnack_radius(x, e));
    if (!(out.radius > 0.0)) {
      out.terminated = true;
      out.query = project(x, e);
    }
    return out;
  }

  // Newton projection onto the zero set.
  BoundaryQuery<Dim> closest(const Vec<Dim>& x) const {
    Vec<Dim> y = x;
    Eval e = evaluate(y);
    for (int it = 0; it < 60; ++it) {
      const double g2 = e.grad.squaredNorm();
      if (!(g2 > 0.0)) break;
      const double step = std::abs(e.h) / std::sqrt(g2);
      y -= e.h / g2 * e.grad;
      e = evaluate(y);
      if (step < 1e-13 * box_.max_side()) break;
    }
    BoundaryQuery<Dim> q;
    q.point = x;
    q.closest = y;
    q.distance = (x - y).norm();
    q.normal = -e.grad.normalized();
    q.primitive = 0;
    q.revision = revision_;
    return q;
  }

  // Distance-like band coordinate |h| / |grad h|.
  double level_distance(const Vec<Dim>& x) const {
    const Eval e = evaluate(x);
    return std::abs(e.h) / e.grad.norm();
  }

  // v_n = (dh/dpi_k) / |grad h| at the boundary point.
  NormalVelocity normal_velocity(const BoundaryQuery<Dim>& q) const {
    if (q.revision != revision_) throw ConsistencyError("monopoles: stale boundary query");
    const Eval e = evaluate(q.closest);
    const double g = e.grad.norm();
    NormalVelocity out;
    out.push_back({0, 1.0 / g});
    for (int n = 0; n < num_poles(); ++n) {
      const Vec<Dim> d = q.closest - pole(n);
      const double r = d.norm();
      const int first = 1 + n * (Dim + 1);
      out.push_back({first, 1.0 / (r * g)});
      const Vec<Dim> dp = scale(n) / (r * r * r) * d;
      for (int c = 0; c < Dim; ++c)
        if (dp[c] != 0.0) out.push_back({first + 1 + c, dp[c] / g});
    }
    return out;
  }

  // Mean-curvature-type divergence of the outward normal -grad h / |grad h|.
  double curvature(const BoundaryQuery<Dim>& q) const {
    const Eval e = evaluate(q.closest);
    const auto H = hessian(q.closest);
    const double g = e.grad.norm();
    return -(H.trace() * g * g - e.grad.dot(H * e.grad)) / (g * g * g);
  }

  BoundarySample<Dim> sample_boundary(CounterRng&) const {
    throw UnsupportedError("monopoles: boundary sampling unavailable; use the band approximation");
  }
  double perimeter() const { throw UnsupportedError("monopoles: boundary measure unavailable"); }

 private:
  BoundaryQuery<Dim> project(const Vec<Dim>& x, const Eval& e) const {
    const double g2 = e.grad.squaredNorm();
    BoundaryQuery<Dim> q;
    q.point = x;
    q.closest = x - e.h / g2 * e.grad;
    q.distance = std::abs(e.h) / std::sqrt(g2);
    q.normal = -e.grad / std::sqrt(g2);
    q.primitive = 0;
    q.revision = revision_;
    return q;
  }

  // Bound on h over B(x, rho): lower bound if h(x) > 0, upper bound otherwise.
  double interval_bound(const Vec<Dim>& x, double rho, bool lower) const {
    double b = offset();
    for (int n = 0; n < num_poles(); ++n) {
      const double D = (x - pole(n)).norm();
      const double a = scale(n);
      const bool toward_pole = lower ? a < 0.0 : a > 0.0;
      if (toward_pole) {
        if (rho >= D) return lower ? -kInf : kInf;
        b += a / (D - rho);
      } else {
        b += a / (D + rho);
      }
    }
    return b;
  }

  double interval_radius(const Vec<Dim>& x, const Eval& e) const {
    const bool lower = e.h > 0.0;
    auto safe = [&](double rho) {
      const double b = interval_bound(x, rho, lower);
      return lower ? b > 0.0 : b < 0.0;
    };
    const double cap = e.min_pole_distance + box_.max_side();
    if (safe(cap)) return cap;
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 60 && hi - lo > 1e-12 * cap; ++it) {
      const double mid = 0.5 * (lo + hi);
      (safe(mid) ? lo : hi) = mid;
    }
    return lo;
  }

  double harnack_radius(const Vec<Dim>& x, const Eval& e) const {
    const double sign = e.h > 0.0 ? 1.0 : -1.0;
    const double v = sign * e.h;
    double best = 0.0;
    for (double frac : {0.25, 0.5, 0.75, 0.9}) {
      const double R = frac * e.min_pole_distance;
      const double bound = sign * interval_bound(x, R, e.h > 0.0);  // lower bound of sign*h on B(x, R)
      double rho;
      if (bound >= 0.0) {
        rho = R;
      } else {
        // 3D Harnack: (v - m)(y) >= (v - m)(x) R (R - r) / (R + r)^2 for the positive function v - m.
        const double t = -bound / (v - bound);
        rho = R * (std::sqrt(8.0 * t + 1.0) - (2.0 * t + 1.0)) / (2.0 * t);
      }
      best = std::max(best, rho);
    }
    return best;
  }

  std::vector<double> params_;
  std::vector<ParamInfo> layout_;
  Box<Dim> box_;
  double exclusion_ = 0.0;
  std::uint64_t revision_ = 0;
};

using Monopoles = ImplicitMonopoles<2>;

}  // namespace dwos
