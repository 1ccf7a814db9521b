#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "causal/dataset.hpp"
#include "causal/error.hpp"
#include "causal/graph.hpp"
#include "causal/prob_table.hpp"
#include "causal/rng.hpp"

namespace causal {

/** One mechanism: domain size, parent list, and a conditional probability
 * table laid out row-major with the first parent most significant:
 * cpt[parent_combo * domain + value]. */
struct Mechanism {
  std::string name;
  int domain = 0;
  std::vector<std::string> parents;
  std::vector<double> cpt;
  friend bool operator==(const Mechanism&, const Mechanism&) = default;
};

/**
 * Discrete structural causal model over categorical variables. Holds the
 * mechanisms in declaration order (which fixes sampled column order), an
 * observation mask, and the induced graph (unobserved variables marked so).
 */
class StructuralModel {
 public:
  StructuralModel() = default;

  static StructuralModel build(std::vector<Mechanism> mechanisms,
                               std::set<std::string> observed) {
    StructuralModel m;
    m.mechanisms_ = std::move(mechanisms);
    m.observed_ = std::move(observed);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < m.mechanisms_.size(); ++i) {
      const Mechanism& v = m.mechanisms_[i];
      if (v.domain < 1) fail(ErrorCode::invalid_cpt, "domain must be positive for " + v.name);
      if (!index.emplace(v.name, i).second)
        fail(ErrorCode::duplicate_name, "duplicate variable: " + v.name);
    }
    for (const auto& name : m.observed_)
      if (!index.count(name)) fail(ErrorCode::unknown_variable, "observed lists unknown " + name);
    std::vector<Variable> vars;
    std::vector<Edge> edges;
    for (const Mechanism& v : m.mechanisms_) {
      vars.push_back(Variable{
          v.name, m.observed_.count(v.name) ? VarKind::observed : VarKind::unobserved});
      std::size_t rows = 1;
      for (const auto& p : v.parents) {
        auto it = index.find(p);
        if (it == index.end()) fail(ErrorCode::unknown_variable, v.name + " has unknown parent " + p);
        rows *= static_cast<std::size_t>(m.mechanisms_[it->second].domain);
        edges.push_back(directed(p, v.name));
      }
      if (v.cpt.size() != rows * static_cast<std::size_t>(v.domain))
        fail(ErrorCode::invalid_cpt, "cpt size mismatch for " + v.name);
      for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (int k = 0; k < v.domain; ++k) {
          double p = v.cpt[r * v.domain + k];
          if (p < 0.0) fail(ErrorCode::invalid_cpt, "negative cpt entry for " + v.name);
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
          fail(ErrorCode::invalid_cpt, "cpt row does not sum to 1 for " + v.name);
      }
    }
    m.graph_ = Graph::build(std::move(vars), std::move(edges));  // rejects cycles
    m.index_ = std::move(index);
    return m;
  }

  const std::vector<Mechanism>& mechanisms() const { return mechanisms_; }
  const std::set<std::string>& observed() const { return observed_; }
  const Graph& graph() const { return graph_; }

  const Mechanism& mechanism(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) fail(ErrorCode::unknown_variable, "unknown variable: " + name);
    return mechanisms_[it->second];
  }

  int domain_of(const std::string& name) const { return mechanism(name).domain; }

  /** Replace one mechanism (same domain); used for policy rewiring. */
  StructuralModel with_mechanism(const std::string& name, std::vector<std::string> parents,
                                 std::vector<double> cpt) const {
    std::vector<Mechanism> ms = mechanisms_;
    auto it = index_.find(name);
    if (it == index_.end()) fail(ErrorCode::unknown_variable, "unknown variable: " + name);
    ms[it->second].parents = std::move(parents);
    ms[it->second].cpt = std::move(cpt);
    return build(std::move(ms), observed_);
  }

  /** Graph surgery: point-mass mechanisms with no parents at the set values. */
  StructuralModel intervene(const std::map<std::string, int>& settings) const {
    std::vector<Mechanism> ms = mechanisms_;
    for (const auto& [name, value] : settings) {
      auto it = index_.find(name);
      if (it == index_.end()) fail(ErrorCode::unknown_variable, "unknown variable: " + name);
      Mechanism& v = ms[it->second];
      if (value < 0 || value >= v.domain)
        fail(ErrorCode::value_out_of_domain, "intervention value out of domain for " + name);
      v.parents.clear();
      v.cpt.assign(static_cast<std::size_t>(v.domain), 0.0);
      v.cpt[static_cast<std::size_t>(value)] = 1.0;
    }
    return build(std::move(ms), observed_);
  }

  /**
   * n i.i.d. rows, deterministic in the seed: one mt19937_64 stream, rows in
   * order, variables drawn in topological order within a row. Only observed
   * columns appear, in declaration order.
   */
  Dataset sample(std::size_t n, std::uint64_t seed, std::string population = "") const {
    std::vector<std::size_t> topo;
    for (const auto& name : graph_.topological_order()) topo.push_back(index_.at(name));
    Rng rng = make_rng(seed);
    std::vector<int> row(mechanisms_.size());
    std::vector<std::vector<double>> draws(mechanisms_.size());
    for (auto& d : draws) d.reserve(n);
    std::vector<double> probs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t vi : topo) {
        const Mechanism& v = mechanisms_[vi];
        std::size_t stratum = 0;
        for (const auto& p : v.parents) {
          std::size_t pi = index_.at(p);
          stratum = stratum * static_cast<std::size_t>(mechanisms_[pi].domain) +
                    static_cast<std::size_t>(row[pi]);
        }
        probs.assign(v.cpt.begin() + static_cast<std::ptrdiff_t>(stratum * v.domain),
                     v.cpt.begin() + static_cast<std::ptrdiff_t>((stratum + 1) * v.domain));
        row[vi] = draw_categorical(rng, probs);
      }
      for (std::size_t vi = 0; vi < row.size(); ++vi)
        draws[vi].push_back(static_cast<double>(row[vi]));
    }
    Schema schema;
    std::vector<std::pair<std::string, std::vector<double>>> cols;
    for (std::size_t vi = 0; vi < mechanisms_.size(); ++vi) {
      const Mechanism& v = mechanisms_[vi];
      if (!observed_.count(v.name)) continue;
      schema[v.name] = categorical(v.domain);
      cols.emplace_back(v.name, std::move(draws[vi]));
    }
    return Dataset::build(std::move(schema), std::move(cols), std::move(population));
  }

  /** Exact joint over all variables by full enumeration (capped at 1e6 cells). */
  ProbTable exact_joint() const {
    double cells_d = 1.0;
    for (const Mechanism& v : mechanisms_) cells_d *= v.domain;
    if (cells_d > 1e6) fail(ErrorCode::state_space_too_large, "state space exceeds 1e6 cells");
    std::vector<std::string> names;
    std::vector<int> sizes;
    for (const Mechanism& v : mechanisms_) {
      names.push_back(v.name);
      sizes.push_back(v.domain);
    }
    std::size_t cells = static_cast<std::size_t>(cells_d);
    std::vector<double> probs(cells, 0.0);
    std::vector<int> levels(mechanisms_.size(), 0);
    for (std::size_t flat = 0; flat < cells; ++flat) {
      std::size_t rest = flat;
      for (std::size_t i = mechanisms_.size(); i-- > 0;) {
        levels[i] = static_cast<int>(rest % static_cast<std::size_t>(sizes[i]));
        rest /= static_cast<std::size_t>(sizes[i]);
      }
      double p = 1.0;
      for (std::size_t vi = 0; vi < mechanisms_.size() && p > 0.0; ++vi) {
        const Mechanism& v = mechanisms_[vi];
        std::size_t stratum = 0;
        for (const auto& par : v.parents) {
          std::size_t pi = index_.at(par);
          stratum = stratum * static_cast<std::size_t>(mechanisms_[pi].domain) +
                    static_cast<std::size_t>(levels[pi]);
        }
        p *= v.cpt[stratum * static_cast<std::size_t>(v.domain) +
                   static_cast<std::size_t>(levels[vi])];
      }
      probs[flat] = p;
    }
    return ProbTable::build(std::move(names), std::move(sizes), std::move(probs));
  }

  /** Marginal joint over observed variables only. */
  ProbTable observed_joint() const {
    std::vector<std::string> keep;
    for (const Mechanism& v : mechanisms_)
      if (observed_.count(v.name)) keep.push_back(v.name);
    return exact_joint().marginal(keep);
  }

 private:
  std::vector<Mechanism> mechanisms_;
  std::set<std::string> observed_;
  Graph graph_;
  std::map<std::string, std::size_t> index_;
};

/** E[outcome level] under do(settings), by exact enumeration. */
inline double true_counterfactual_mean(const StructuralModel& m,
                                       const std::map<std::string, int>& settings,
                                       const std::string& outcome) {
  ProbTable joint = m.intervene(settings).exact_joint();
  double mean = 0.0;
  ProbTable py = joint.marginal({outcome});
  for (int level = 0; level < py.size_of(outcome); ++level)
    mean += static_cast<double>(level) * py.cell(static_cast<std::size_t>(level));
  return mean;
}

}  // namespace causal
