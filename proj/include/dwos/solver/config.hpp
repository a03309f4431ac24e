#pragma once

#include "dwos/core/errors.hpp"

#include <cstdint>
#include <string>

namespace dwos {

enum class NormalMethod { Backward, OffsetBall };

inline NormalMethod parse_normal_method(const std::string& s) {
  if (s == "backward") return NormalMethod::Backward;
  if (s == "offset_ball") return NormalMethod::OffsetBall;
  throw ConfigError("unknown normal-derivative method '" + s + "'");
}
inline const char* to_string(NormalMethod m) { return m == NormalMethod::Backward ? "backward" : "offset_ball"; }

/// Walk settings. Lengths (epsilon, offset) are fractions of the scene extent.
struct SolverConfig {
  double epsilon = 1e-3;
  double offset = 0.0;  // normal-derivative offset c; 0 selects 10 * epsilon
  int max_steps = 10000;
  bool russian_roulette = true;
  int walks = 64;          // walks per evaluation point
  int forward_walks = 1;   // nested forward walks per terminal point
  NormalMethod method = NormalMethod::Backward;
  std::uint64_t seed = 0;
  int channel = 0;

  double epsilon_abs(double extent) const { return epsilon * extent; }
  double offset_abs(double extent) const { return (offset > 0.0 ? offset : 10.0 * epsilon) * extent; }

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("solver: epsilon must be positive");
    if (offset != 0.0 && offset < epsilon) throw ConfigError("solver: offset must be at least epsilon");
    if (max_steps < 1) throw ConfigError("solver: max_steps must be at least 1");
    if (walks < 1) throw ConfigError("solver: walks must be at least 1");
    if (forward_walks < 1) throw ConfigError("solver: forward_walks must be at least 1");
    if (channel < 0) throw ConfigError("solver: channel must be non-negative");
  }
};

}  // namespace dwos
