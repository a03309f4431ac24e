#pragma once

#include "dwos/core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dwos {

/// WPP_t = round(WPP_0 exp(log(WPP_T / WPP_0) t / T)), clamped to [WPP_0, WPP_T].
inline int wpp_schedule(int t, int wpp0, int wppT, int T) {
  if (wpp0 < 1 || wppT < wpp0) throw ConfigError("wpp schedule: need 1 <= WPP_0 <= WPP_T");
  if (T <= 0 || wpp0 == wppT) return wpp0;
  const double s = std::clamp(static_cast<double>(t) / T, 0.0, 1.0);
  const double w = std::round(wpp0 * std::exp(std::log(static_cast<double>(wppT) / wpp0) * s));
  return std::clamp(static_cast<int>(w), wpp0, wppT);
}

// alpha_t = alpha_0 (WPP_t / WPP_0)^(-1/2)
inline double regularizer_decay(double alpha0, int wpp_t, int wpp0) {
  return alpha0 / std::sqrt(static_cast<double>(wpp_t) / wpp0);
}

}  // namespace dwos
