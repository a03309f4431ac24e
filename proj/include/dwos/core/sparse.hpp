#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace dwos {

/// Derivative vector over N parameters.
///
/// Stored as sorted (index, value) pairs while sparse; switches to a dense array once more than a
/// quarter of the entries are occupied. Terminal-point derivative samples on meshes usually touch
/// only a handful of parameters.
class SparseGrad {
 public:
  SparseGrad() = default;
  explicit SparseGrad(int n) : n_(n) {}

  int size() const { return n_; }
  bool is_dense() const { return !dense_.empty(); }

  int nonzeros() const {
    if (!is_dense()) return static_cast<int>(entries_.size());
    return static_cast<int>(std::count_if(dense_.begin(), dense_.end(), [](double v) { return v != 0.0; }));
  }
  bool empty() const { return nonzeros() == 0; }

  void add(int index, double value) {
    if (value == 0.0) return;
    if (is_dense()) {
      dense_[index] += value;
      return;
    }
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const auto& e, int i) { return e.first < i; });
    if (it != entries_.end() && it->first == index) {
      it->second += value;
    } else {
      entries_.insert(it, {index, value});
      if (4 * static_cast<int>(entries_.size()) > n_) densify();
    }
  }

  void add(const SparseGrad& other, double scale = 1.0) {
    other.for_each([&](int i, double v) { add(i, scale * v); });
  }

  void scale(double s) {
    for (auto& e : entries_) e.second *= s;
    for (double& v : dense_) v *= s;
  }

  double operator[](int index) const {
    if (is_dense()) return dense_[index];
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const auto& e, int i) { return e.first < i; });
    return (it != entries_.end() && it->first == index) ? it->second : 0.0;
  }

  template <class F>
  void for_each(F&& f) const {
    if (is_dense()) {
      for (int i = 0; i < n_; ++i)
        if (dense_[i] != 0.0) f(i, dense_[i]);
    } else {
      for (const auto& [i, v] : entries_) f(i, v);
    }
  }

  bool all_finite() const {
    bool ok = true;
    for_each([&](int, double v) { ok = ok && std::isfinite(v); });
    return ok;
  }

  void accumulate_into(std::span<double> dense, double scale = 1.0) const {
    for_each([&](int i, double v) { dense[i] += scale * v; });
  }

  std::vector<double> to_dense() const {
    std::vector<double> out(n_, 0.0);
    accumulate_into(out);
    return out;
  }

 private:
  void densify() {
    dense_.assign(n_, 0.0);
    for (const auto& [i, v] : entries_) dense_[i] = v;
    entries_.clear();
  }

  int n_ = 0;
  std::vector<std::pair<int, double>> entries_;
  std::vector<double> dense_;
};

}  // namespace dwos
