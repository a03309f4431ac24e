#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/geometry/params.hpp"

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dwos {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adam: betas must lie in (0, 1)");
    if (!(eps > 0.0)) throw ConfigError("adam: eps must be positive");
  }
};

/// Groups spatial parameters (positions, handles, translations) by point, e.g. "vertex[3].x" and
/// "vertex[3].y"; everything else gets -1 and is updated by scalar Adam.
inline std::vector<int> vector_groups(const std::vector<ParamInfo>& layout) {
  std::vector<int> group(layout.size(), -1);
  std::map<std::string, int> ids;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto& p = layout[k];
    if (p.role != "position" && p.role != "handle" && p.role != "translation") continue;
    const auto dot = p.name.rfind('.');
    if (dot == std::string::npos) continue;
    const auto [it, inserted] = ids.try_emplace(p.name.substr(0, dot), static_cast<int>(ids.size()));
    group[k] = it->second;
  }
  return group;
}

/// Adam for scalars; Vector Adam for grouped parameters, where the second moment tracks the
/// squared norm of the group's gradient so the update keeps the gradient's direction.
class Adam {
 public:
  Adam() = default;
  Adam(int n, std::vector<int> groups = {}) : m_(n, 0.0), v_(n, 0.0), group_(std::move(groups)) {
    if (group_.empty()) group_.assign(n, -1);
    if (static_cast<int>(group_.size()) != n) throw ConfigError("adam: group map size mismatch");
    int ng = 0;
    for (int g : group_) ng = std::max(ng, g + 1);
    members_.resize(ng);
    for (int k = 0; k < n; ++k)
      if (group_[k] >= 0) members_[group_[k]].push_back(k);
    vg_.assign(ng, 0.0);
  }

  int iterations() const { return t_; }
  int skipped() const { return skipped_; }

  // Non-finite gradient entries are skipped (whole group for grouped parameters) and counted.
  void step(std::span<double> params, std::span<const double> grad, const AdamConfig& cfg) {
    if (params.size() != m_.size() || grad.size() != m_.size()) throw ConfigError("adam: size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg.beta2, t_);
    for (std::size_t k = 0; k < m_.size(); ++k) {
      if (group_[k] >= 0) continue;
      if (!std::isfinite(grad[k])) {
        ++skipped_;
        continue;
      }
      m_[k] = cfg.beta1 * m_[k] + (1.0 - cfg.beta1) * grad[k];
      v_[k] = cfg.beta2 * v_[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
      params[k] -= cfg.lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + cfg.eps);
    }
    for (std::size_t g = 0; g < members_.size(); ++g) {
      double norm2 = 0.0;
      bool finite = true;
      for (int k : members_[g]) {
        finite = finite && std::isfinite(grad[k]);
        norm2 += grad[k] * grad[k];
      }
      if (!finite) {
        skipped_ += static_cast<int>(members_[g].size());
        continue;
      }
      vg_[g] = cfg.beta2 * vg_[g] + (1.0 - cfg.beta2) * norm2;
      const double denom = std::sqrt(vg_[g] / c2) + cfg.eps;
      for (int k : members_[g]) {
        m_[k] = cfg.beta1 * m_[k] + (1.0 - cfg.beta1) * grad[k];
        params[k] -= cfg.lr * (m_[k] / c1) / denom;
      }
    }
  }

 private:
  std::vector<double> m_, v_;
  std::vector<int> group_;
  std::vector<std::vector<int>> members_;
  std::vector<double> vg_;
  int t_ = 0;
  int skipped_ = 0;
};

}  // namespace dwos
