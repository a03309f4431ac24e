#pragma once

#include "dwos/core/rng.hpp"
#include "dwos/core/types.hpp"

#include <cmath>

namespace dwos {

// Uniform direction on the unit sphere S^{Dim-1}.
template <int Dim>
Vec<Dim> sample_unit_sphere(CounterRng& rng) {
  static_assert(Dim == 2 || Dim == 3);
  if constexpr (Dim == 2) {
    const double theta = 2.0 * kPi * rng.uniform();
    return {std::cos(theta), std::sin(theta)};
  } else {
    const double z = 1.0 - 2.0 * rng.uniform();
    const double phi = 2.0 * kPi * rng.uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
  }
}

// Uniform point in the unit ball; never returns the exact center.
template <int Dim>
Vec<Dim> sample_unit_ball(CounterRng& rng) {
  const double r = std::pow(rng.uniform_open0(), 1.0 / Dim);
  return r * sample_unit_sphere<Dim>(rng);
}

template <int Dim>
Vec<Dim> sample_sphere(CounterRng& rng, const Vec<Dim>& center, double R) {
  return center + R * sample_unit_sphere<Dim>(rng);
}

template <int Dim>
Vec<Dim> sample_ball(CounterRng& rng, const Vec<Dim>& center, double R) {
  return center + R * sample_unit_ball<Dim>(rng);
}

}  // namespace dwos
