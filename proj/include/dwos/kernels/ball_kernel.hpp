#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/types.hpp"

#include <cmath>
#include <string>

namespace dwos {

// Surface measure |dB| and volume |B| of a ball of radius R.
template <int Dim>
constexpr double sphere_measure(double R) {
  static_assert(Dim == 2 || Dim == 3);
  if constexpr (Dim == 2) return 2.0 * kPi * R;
  else return 4.0 * kPi * R * R;
}

template <int Dim>
constexpr double ball_measure(double R) {
  static_assert(Dim == 2 || Dim == 3);
  if constexpr (Dim == 2) return kPi * R * R;
  else return 4.0 / 3.0 * kPi * R * R * R;
}

inline double bessel_i0(double x) { return std::cyl_bessel_i(0.0, x); }
inline double bessel_k0(double x) { return std::cyl_bessel_k(0.0, x); }

/// Green's function and Poisson-kernel attenuation of the zero-Dirichlet screened Poisson operator
/// (Delta - sigma) on a ball of radius R centered at the evaluation point.
template <int Dim>
struct BallKernel {
  static_assert(Dim == 2 || Dim == 3);

  double radius;
  double sigma = 0.0;

  BallKernel(double R, double s) : radius(R), sigma(s) {
    if (!(R > 0.0)) throw DomainError("ball kernel radius must be positive");
    if (!(s >= 0.0)) throw DomainError("screening coefficient must be non-negative");
  }

  /// Ratio of the Poisson kernel at the center to the uniform sphere density, P(R) * |dB|.
  /// Equals the probability that a screened walk survives one step.
  double attenuation() const {
    if (sigma == 0.0) return 1.0;
    const double x = std::sqrt(sigma) * radius;
    if constexpr (Dim == 3) {
      // x / sinh(x), written to avoid overflow for large x.
      if (x < 1e-4) return 1.0 - x * x / 6.0;
      return 2.0 * x * std::exp(-x) / (1.0 - std::exp(-2.0 * x));
    } else {
      return 1.0 / bessel_i0(x);
    }
  }

  /// G(r) for 0 < r <= R; zero on the sphere.
  double greens(double r) const {
    if (!(r > 0.0) || r > radius) {
      throw DomainError("greens: r = " + std::to_string(r) + " outside (0, " + std::to_string(radius) + "]");
    }
    if (r == radius) return 0.0;
    const double R = radius;
    if (sigma == 0.0) {
      if constexpr (Dim == 3) return (1.0 / r - 1.0 / R) / (4.0 * kPi);
      else return std::log(R / r) / (2.0 * kPi);
    }
    const double k = std::sqrt(sigma);
    if constexpr (Dim == 3) {
      // sinh(k(R - r)) / sinh(kR) = e^{-kr} (1 - e^{-2k(R-r)}) / (1 - e^{-2kR})
      const double ratio = std::exp(-k * r) * (-std::expm1(-2.0 * k * (R - r))) / (-std::expm1(-2.0 * k * R));
      return ratio / (4.0 * kPi * r);
    } else {
      const double kr = k * r, kR = k * R;
      return (bessel_k0(kr) - bessel_k0(kR) * bessel_i0(kr) / bessel_i0(kR)) / (2.0 * kPi);
    }
  }

  double ball_volume() const { return ball_measure<Dim>(radius); }
  double sphere_area() const { return sphere_measure<Dim>(radius); }
};

}  // namespace dwos
