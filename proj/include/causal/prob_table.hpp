#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "causal/error.hpp"

namespace causal {

/**
 * Dense joint probability table over named categorical variables. Cells are
 * indexed mixed-radix with the first variable most significant. Values are
 * plain doubles; construction checks shape, non-negativity and total mass.
 */
class ProbTable {
 public:
  ProbTable() = default;

  static ProbTable build(std::vector<std::string> vars, std::vector<int> sizes,
                         std::vector<double> probs) {
    ProbTable t = raw(std::move(vars), std::move(sizes), std::move(probs));
    double total = 0.0;
    for (double p : t.p_) {
      if (p < -1e-12) fail(ErrorCode::invalid_cpt, "negative probability in table");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-6) fail(ErrorCode::invalid_cpt, "table mass differs from 1");
    return t;
  }

  /** No mass/negativity validation; for intermediate arithmetic. */
  static ProbTable raw(std::vector<std::string> vars, std::vector<int> sizes,
                       std::vector<double> probs) {
    if (vars.size() != sizes.size()) fail(ErrorCode::dimension_mismatch, "vars/sizes mismatch");
    std::size_t cells = 1;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] <= 0) fail(ErrorCode::invalid_cpt, "non-positive domain for " + vars[i]);
      cells *= static_cast<std::size_t>(sizes[i]);
    }
    if (probs.size() != cells) fail(ErrorCode::dimension_mismatch, "cell count mismatch");
    ProbTable t;
    t.vars_ = std::move(vars);
    t.sizes_ = std::move(sizes);
    t.p_ = std::move(probs);
    for (std::size_t i = 0; i < t.vars_.size(); ++i)
      if (!t.axis_.emplace(t.vars_[i], i).second)
        fail(ErrorCode::duplicate_name, "duplicate variable in table: " + t.vars_[i]);
    return t;
  }

  const std::vector<std::string>& names() const { return vars_; }
  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t cells() const { return p_.size(); }
  double cell(std::size_t flat) const { return p_[flat]; }
  double& cell(std::size_t flat) { return p_[flat]; }

  bool has(const std::string& name) const { return axis_.count(name) != 0; }

  std::size_t axis_of(const std::string& name) const {
    auto it = axis_.find(name);
    if (it == axis_.end()) fail(ErrorCode::unknown_variable, "variable not in table: " + name);
    return it->second;
  }

  int size_of(const std::string& name) const { return sizes_[axis_of(name)]; }

  std::size_t encode(const std::vector<int>& levels) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (levels[i] < 0 || levels[i] >= sizes_[i])
        fail(ErrorCode::value_out_of_domain, "level out of range for " + vars_[i]);
      flat = flat * static_cast<std::size_t>(sizes_[i]) + static_cast<std::size_t>(levels[i]);
    }
    return flat;
  }

  std::vector<int> decode(std::size_t flat) const {
    std::vector<int> levels(sizes_.size());
    for (std::size_t i = sizes_.size(); i-- > 0;) {
      levels[i] = static_cast<int>(flat % static_cast<std::size_t>(sizes_[i]));
      flat /= static_cast<std::size_t>(sizes_[i]);
    }
    return levels;
  }

  double prob(const std::map<std::string, int>& assignment) const {
    std::vector<int> levels(sizes_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      auto it = assignment.find(vars_[i]);
      if (it == assignment.end())
        fail(ErrorCode::unknown_variable, "assignment misses " + vars_[i]);
      levels[i] = it->second;
    }
    return p_[encode(levels)];
  }

  /** Total mass of cells matching a partial assignment. */
  double mass(const std::map<std::string, int>& partial) const {
    std::vector<int> want(sizes_.size(), -1);
    for (const auto& [name, level] : partial) {
      std::size_t a = axis_of(name);
      if (level < 0 || level >= sizes_[a])
        fail(ErrorCode::value_out_of_domain, "level out of range for " + name);
      want[a] = level;
    }
    double total = 0.0;
    for (std::size_t flat = 0; flat < p_.size(); ++flat) {
      std::vector<int> levels = decode(flat);
      bool match = true;
      for (std::size_t i = 0; i < levels.size() && match; ++i)
        if (want[i] >= 0 && levels[i] != want[i]) match = false;
      if (match) total += p_[flat];
    }
    return total;
  }

  /** Marginal over the named variables, axes in the order given. */
  ProbTable marginal(const std::vector<std::string>& keep) const {
    std::vector<std::size_t> axes;
    std::vector<int> sizes;
    for (const auto& name : keep) {
      axes.push_back(axis_of(name));
      sizes.push_back(sizes_[axes.back()]);
    }
    std::size_t cells = 1;
    for (int s : sizes) cells *= static_cast<std::size_t>(s);
    std::vector<double> probs(cells, 0.0);
    for (std::size_t flat = 0; flat < p_.size(); ++flat) {
      std::vector<int> levels = decode(flat);
      std::size_t out = 0;
      for (std::size_t i = 0; i < axes.size(); ++i)
        out = out * static_cast<std::size_t>(sizes[i]) + static_cast<std::size_t>(levels[axes[i]]);
      probs[out] += p_[flat];
    }
    ProbTable t;
    t.vars_ = keep;
    t.sizes_ = std::move(sizes);
    t.p_ = std::move(probs);
    for (std::size_t i = 0; i < t.vars_.size(); ++i) t.axis_.emplace(t.vars_[i], i);
    return t;
  }

  /** E[encoded level of target | partial assignment]; requires positive mass. */
  double conditional_mean(const std::string& target,
                          const std::map<std::string, int>& given) const {
    double denom = mass(given);
    if (denom <= 0.0) fail(ErrorCode::positivity, "conditioning event has zero mass");
    double num = 0.0;
    std::map<std::string, int> q = given;
    for (int level = 0; level < size_of(target); ++level) {
      q[target] = level;
      num += static_cast<double>(level) * mass(q);
    }
    return num / denom;
  }

  double total_mass() const {
    double total = 0.0;
    for (double p : p_) total += p;
    return total;
  }

  void scale(double factor) {
    for (double& p : p_) p *= factor;
  }

 private:
  std::vector<std::string> vars_;
  std::vector<int> sizes_;
  std::vector<double> p_;
  std::map<std::string, std::size_t> axis_;
};

/** I(X;Y | Z) in nats over an exact joint; zero-probability terms contribute 0. */
inline double conditional_mutual_information(const ProbTable& t, const std::string& x,
                                             const std::string& y,
                                             const std::set<std::string>& z) {
  std::vector<std::string> zvars(z.begin(), z.end());
  std::vector<std::string> xyz = zvars;
  xyz.push_back(x);
  xyz.push_back(y);
  ProbTable pxyz = t.marginal(xyz);
  std::vector<std::string> xz = zvars;
  xz.push_back(x);
  std::vector<std::string> yz = zvars;
  yz.push_back(y);
  ProbTable pxz = t.marginal(xz);
  ProbTable pyz = t.marginal(yz);
  ProbTable pz = zvars.empty() ? ProbTable() : t.marginal(zvars);
  double mi = 0.0;
  for (std::size_t flat = 0; flat < pxyz.cells(); ++flat) {
    double pj = pxyz.cell(flat);
    if (pj <= 0.0) continue;
    std::vector<int> levels = pxyz.decode(flat);
    std::map<std::string, int> a;
    for (std::size_t i = 0; i < xyz.size(); ++i) a[xyz[i]] = levels[i];
    std::map<std::string, int> axz(a), ayz(a), az(a);
    axz.erase(y);
    ayz.erase(x);
    az.erase(x);
    az.erase(y);
    double z_mass = zvars.empty() ? 1.0 : pz.prob(az);
    mi += pj * std::log(pj * z_mass / (pxz.prob(axz) * pyz.prob(ayz)));
  }
  return mi;
}

/** Total variation distance between two tables over identical variable sets. */
inline double tv_distance(const ProbTable& a, const ProbTable& b) {
  ProbTable aligned = b.marginal(a.names());
  if (a.sizes() != aligned.sizes()) fail(ErrorCode::dimension_mismatch, "table shapes differ");
  double d = 0.0;
  for (std::size_t flat = 0; flat < a.cells(); ++flat)
    d += std::abs(a.cell(flat) - aligned.cell(flat));
  return 0.5 * d;
}

}  // namespace causal
