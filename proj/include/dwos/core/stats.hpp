#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace dwos {

// Welford running mean and unbiased variance.
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++count;
    double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stderr_mean() const { return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

inline RunningStats summarize(std::span<const double> xs) {
  RunningStats s;
  for (double x : xs) s.push(x);
  return s;
}

}  // namespace dwos
