#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/core/types.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dwos {

// Describes one entry of a flat parameter vector.
struct ParamInfo {
  std::string name;       // e.g. "vertex[3].y", "pole[1].scale"
  std::string role;       // position | tangent | handle | radius | translation | scale | offset | data
  int component = 0;
};

/// A control point that depends affinely on the parameter vector:
/// position = base + sum_k params[k] * direction_k.
template <int Dim>
struct AffinePoint {
  Vec<Dim> base = Vec<Dim>::Zero();
  std::vector<std::pair<int, Vec<Dim>>> terms;

  Vec<Dim> eval(std::span<const double> params) const {
    Vec<Dim> p = base;
    for (const auto& [k, dir] : terms) p += params[k] * dir;
    return p;
  }

  // Point whose coordinates are the parameters first, first+1, ...
  static AffinePoint free(int first) {
    AffinePoint a;
    for (int c = 0; c < Dim; ++c) a.terms.push_back({first + c, Vec<Dim>::Unit(c)});
    return a;
  }
};

inline void check_param_count(std::span<const double> values, std::size_t expected, const char* who) {
  if (values.size() != expected) {
    throw ConfigError(std::string(who) + ": expected " + std::to_string(expected) + " parameters, got " +
                      std::to_string(values.size()));
  }
}

}  // namespace dwos
