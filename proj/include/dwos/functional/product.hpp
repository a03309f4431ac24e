#pragma once

#include "dwos/core/errors.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <vector>

namespace dwos {

enum class ProductKind { Uncorrelated, Correlated, UStat };

inline ProductKind parse_product_kind(const std::string& s) {
  if (s == "uncorrelated") return ProductKind::Uncorrelated;
  if (s == "correlated") return ProductKind::Correlated;
  if (s == "ustat") return ProductKind::UStat;
  throw ConfigError("unknown product estimator '" + s + "'");
}
inline const char* to_string(ProductKind k) {
  return k == ProductKind::Uncorrelated ? "uncorrelated" : k == ProductKind::Correlated ? "correlated" : "ustat";
}

struct ProductConfig {
  ProductKind kind = ProductKind::UStat;
  int batch = 8;
};

/// Estimators of E[u] E[du] from paired walk samples (u_m, du_m), all linear in du:
/// the estimate is sum_m w_m du_m and this returns the weights w.
///   uncorrelated: mean of u over the first half times mean of du over the second half
///   correlated:   mean(u) mean(du), biased by Cov(u, du) / n
///   ustat:        per batch of size b, sum_m du_m (S - u_m) / (b (b - 1)) with S = sum of u in the
///                 batch, averaged over batches. Leftover samples join the last batch.
inline std::vector<double> product_weights(std::span<const double> u, const ProductConfig& cfg) {
  const int n = static_cast<int>(u.size());
  std::vector<double> w(n, 0.0);
  if (n == 0) throw ConfigError("product estimate: no samples");
  switch (cfg.kind) {
    case ProductKind::Correlated: {
      double mean = 0.0;
      for (double v : u) mean += v;
      mean /= n;
      std::fill(w.begin(), w.end(), mean / n);
      return w;
    }
    case ProductKind::Uncorrelated: {
      if (n < 2) throw ConfigError("product estimate: uncorrelated estimator needs at least 2 samples");
      const int h = n / 2;
      double mean = 0.0;
      for (int m = 0; m < h; ++m) mean += u[m];
      mean /= h;
      for (int m = h; m < n; ++m) w[m] = mean / (n - h);
      return w;
    }
    case ProductKind::UStat: {
      if (n < 2) throw ConfigError("product estimate: U-statistic needs at least 2 samples");
      if (cfg.batch < 2) throw ConfigError("product estimate: batch size must be at least 2");
      const int b = std::min(cfg.batch, n);
      const int batches = n / b;
      for (int k = 0; k < batches; ++k) {
        const int lo = k * b, hi = k + 1 == batches ? n : lo + b;
        const double size = hi - lo;
        double s = 0.0;
        for (int m = lo; m < hi; ++m) s += u[m];
        for (int m = lo; m < hi; ++m) w[m] = (s - u[m]) / (size * (size - 1.0)) / batches;
      }
      return w;
    }
  }
  return w;
}

// Scalar convenience form.
inline double product_estimate(std::span<const double> u, std::span<const double> du, const ProductConfig& cfg) {
  if (u.size() != du.size()) throw ConfigError("product estimate: sample count mismatch");
  const std::vector<double> w = product_weights(u, cfg);
  double acc = 0.0;
  for (std::size_t m = 0; m < u.size(); ++m) acc += w[m] * du[m];
  return acc;
}

}  // namespace dwos
