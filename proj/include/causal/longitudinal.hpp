#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causal/dataset.hpp"
#include "causal/error.hpp"
#include "causal/estimate.hpp"
#include "causal/identify.hpp"

namespace causal {

/** Static treatment plan: one action level per phase. */
using Regime = std::vector<int>;

/**
 * Stochastic treatment plan for one phase. The conditioning scope must be
 * exactly the earlier treatments plus the covariate blocks up to and
 * including this phase; `given` fixes the key order of `table`, whose rows
 * are distributions over the action's levels.
 */
struct PolicyPhase {
  std::string action;
  std::vector<std::string> given;
  std::map<std::vector<int>, std::vector<double>> table;
};

using PolicySpec = std::vector<PolicyPhase>;

namespace detail {

inline std::vector<PhaseVars> to_phase_vars(const std::vector<Phase>& phases) {
  std::vector<PhaseVars> out;
  for (const auto& ph : phases) out.push_back({ph.treatment, ph.covariates});
  return out;
}

inline void validate_regime(const Dataset& data, const std::vector<Phase>& phases,
                            const Regime& regime) {
  if (regime.size() != phases.size())
    fail(ErrorCode::bad_argument, "regime length must match the number of phases");
  for (std::size_t t = 0; t < phases.size(); ++t)
    require_level(data, phases[t].treatment, regime[t]);
}

/** Maps each policy conditioning variable to its source: an earlier action
 * (by phase index) or a covariate (by flat block offset). */
struct PolicyScope {
  std::vector<std::pair<bool, std::size_t>> sources;  // (is_action, index)
};

inline std::vector<PolicyScope> validate_policy(const Dataset& data,
                                                const std::vector<Phase>& phases,
                                                const PolicySpec& policy) {
  if (policy.size() != phases.size())
    fail(ErrorCode::bad_argument, "policy must declare one phase per estimand phase");
  std::map<std::string, std::size_t> action_index;
  std::map<std::string, std::size_t> block_offset;
  std::size_t flat = 0;
  for (std::size_t t = 0; t < phases.size(); ++t) {
    action_index[phases[t].treatment] = t;
    for (const auto& b : phases[t].covariates) block_offset[b] = flat++;
  }
  std::vector<PolicyScope> scopes;
  for (std::size_t t = 0; t < policy.size(); ++t) {
    const PolicyPhase& pp = policy[t];
    if (pp.action != phases[t].treatment)
      fail(ErrorCode::bad_argument,
           "policy phase " + std::to_string(t) + " action mismatch: " + pp.action);
    // required scope: A_0..A_{t-1} and L_0..L_t
    std::set<std::string> required;
    for (std::size_t s = 0; s < t; ++s) required.insert(phases[s].treatment);
    for (std::size_t s = 0; s <= t; ++s)
      for (const auto& b : phases[s].covariates) required.insert(b);
    std::set<std::string> given(pp.given.begin(), pp.given.end());
    if (given.size() != pp.given.size())
      fail(ErrorCode::bad_argument, "policy phase " + std::to_string(t) + " repeats a variable");
    if (given != required)
      fail(ErrorCode::bad_argument,
           "policy phase " + std::to_string(t) +
               " must condition on exactly the earlier treatments and covariate blocks");
    PolicyScope scope;
    std::size_t expected_rows = 1;
    for (const auto& v : pp.given) {
      if (action_index.count(v) && action_index[v] < t) {
        scope.sources.emplace_back(true, action_index[v]);
        expected_rows *= static_cast<std::size_t>(data.levels_of(v));
      } else {
        scope.sources.emplace_back(false, block_offset.at(v));
        expected_rows *= static_cast<std::size_t>(data.levels_of(v));
      }
    }
    int ka = data.levels_of(pp.action);
    if (pp.table.size() != expected_rows)
      fail(ErrorCode::bad_argument,
           "policy phase " + std::to_string(t) + " table must cover every conditioning combination");
    for (const auto& [key, probs] : pp.table) {
      if (key.size() != pp.given.size())
        fail(ErrorCode::bad_argument, "policy table key arity mismatch");
      if (probs.size() != static_cast<std::size_t>(ka))
        fail(ErrorCode::bad_argument, "policy table row must cover every action level");
      double sum = 0.0;
      for (double p : probs) {
        if (p < 0.0) fail(ErrorCode::bad_argument, "negative policy probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        fail(ErrorCode::bad_argument, "policy table row does not sum to 1");
    }
    scopes.push_back(std::move(scope));
  }
  return scopes;
}

}  // namespace detail

/**
 * Longitudinal plug-in for a static regime:
 * sum over covariate histories of prod_t p-hat(l_t | past) * mean(Y | history).
 */
inline EffectEstimate sequential_gformula(const Dataset& data, const Estimand& est,
                                          const Regime& regime) {
  if (est.kind != EstimandKind::sequential)
    fail(ErrorCode::bad_argument, "sequential_gformula needs a sequential estimand");
  detail::validate_regime(data, est.phases, regime);
  detail::SequentialTables tables(data, detail::to_phase_vars(est.phases), est.outcome);
  std::vector<PositivityEntry> violations;
  EffectEstimate out;
  out.method = "sequential_gformula";
  out.n = data.n();
  out.point = tables.walk(regime, &violations);
  return out;
}

/** Value of a stochastic policy: the static plug-in additionally weighted by
 * the policy's action probabilities, summed over action sequences. */
inline EffectEstimate policy_value(const Dataset& data, const Estimand& est,
                                   const PolicySpec& policy) {
  if (est.kind != EstimandKind::sequential)
    fail(ErrorCode::bad_argument, "policy_value needs a sequential estimand");
  std::vector<detail::PolicyScope> scopes = detail::validate_policy(data, est.phases, policy);
  detail::SequentialTables tables(data, detail::to_phase_vars(est.phases), est.outcome);
  std::vector<PositivityEntry> violations;
  EffectEstimate out;
  out.method = "policy_value";
  out.n = data.n();
  auto g = [&](std::size_t t, const std::vector<int>& treat_prefix,
               const std::vector<int>& combo, int action) {
    std::vector<int> key;
    key.reserve(scopes[t].sources.size());
    for (const auto& [is_action, idx] : scopes[t].sources)
      key.push_back(is_action ? treat_prefix[idx] : combo[idx]);
    auto it = policy[t].table.find(key);
    if (it == policy[t].table.end())
      fail(ErrorCode::bad_argument, "policy table misses a conditioning combination");
    return it->second[static_cast<std::size_t>(action)];
  };
  out.point = tables.walk_policy(g, &violations);
  return out;
}

/** Regression of Y on the treatments alone: mean at all-ones minus mean at
 * all-zeros. The textbook wrong answer under time-varying confounding. */
inline EffectEstimate naive_regression_contrast(const Dataset& data,
                                                const std::vector<std::string>& treatments,
                                                const std::string& y) {
  if (treatments.empty()) fail(ErrorCode::bad_argument, "no treatments given");
  std::vector<detail::PhaseVars> phases;
  for (const auto& t : treatments) {
    if (data.levels_of(t) != 2)
      fail(ErrorCode::bad_argument, "naive contrast expects binary treatments");
    phases.push_back({t, {}});
  }
  detail::SequentialTables tables(data, phases, y);
  std::vector<PositivityEntry> violations;
  EffectEstimate out;
  out.method = "naive_regression_contrast";
  out.n = data.n();
  Regime ones(treatments.size(), 1), zeros(treatments.size(), 0);
  out.point = tables.walk(ones, &violations) - tables.walk(zeros, &violations);
  return out;
}

// ---- exact-distribution functionals ----------------------------------------

namespace detail {

inline double exact_history_factor(const ProbTable& joint, const std::vector<Phase>& phases,
                                   const std::vector<int>& regime_prefix,
                                   const std::vector<std::vector<int>>& block_levels,
                                   std::size_t upto_phase) {
  // prod_{t<=upto} p(l_t | l_{<t}, a_{<t}), all from the exact joint
  double weight = 1.0;
  std::map<std::string, int> ctx;
  for (std::size_t t = 0; t <= upto_phase; ++t) {
    double denom = t == 0 ? 1.0 : joint.mass(ctx);
    for (std::size_t b = 0; b < phases[t].covariates.size(); ++b)
      ctx[phases[t].covariates[b]] = block_levels[t][b];
    double num = joint.mass(ctx);
    if (!phases[t].covariates.empty()) {
      if (denom <= 0.0) return 0.0;
      weight *= num / denom;
    }
    if (t < regime_prefix.size()) ctx[phases[t].treatment] = regime_prefix[t];
  }
  return weight;
}

template <typename ActionWeight>
inline double exact_sequential_sum(const ProbTable& joint, const std::vector<Phase>& phases,
                                   const std::string& outcome, const ActionWeight& act_weight,
                                   bool include_outcome) {
  // enumerate action sequences and block histories
  std::vector<int> treat_sizes;
  std::vector<std::vector<int>> block_sizes;
  for (const auto& ph : phases) {
    treat_sizes.push_back(joint.size_of(ph.treatment));
    std::vector<int> bs;
    for (const auto& b : ph.covariates) bs.push_back(joint.size_of(b));
    block_sizes.push_back(bs);
  }
  double total = 0.0;
  std::vector<int> regime(phases.size(), 0);
  std::function<void(std::size_t)> rec_actions = [&](std::size_t t) {
    if (t < phases.size()) {
      for (int a = 0; a < treat_sizes[t]; ++a) {
        regime[t] = a;
        rec_actions(t + 1);
      }
      return;
    }
    std::vector<std::vector<int>> blocks(phases.size());
    for (std::size_t s = 0; s < phases.size(); ++s)
      blocks[s].assign(block_sizes[s].size(), 0);
    std::function<void(std::size_t, std::size_t)> rec_blocks = [&](std::size_t s, std::size_t b) {
      while (s < phases.size() && b >= blocks[s].size()) {
        ++s;
        b = 0;
      }
      if (s == phases.size()) {
        double gw = act_weight(regime, blocks);
        if (gw == 0.0) return;
        double hist = exact_history_factor(joint, phases, regime, blocks, phases.size() - 1);
        if (hist == 0.0) return;
        double term;
        if (include_outcome) {
          std::map<std::string, int> ctx;
          for (std::size_t t = 0; t < phases.size(); ++t) {
            for (std::size_t i = 0; i < phases[t].covariates.size(); ++i)
              ctx[phases[t].covariates[i]] = blocks[t][i];
            ctx[phases[t].treatment] = regime[t];
          }
          double denom = joint.mass(ctx);
          if (denom <= 0.0)
            fail(ErrorCode::positivity, "functional undefined: history has zero mass");
          double num = 0.0;
          for (int lvl = 0; lvl < joint.size_of(outcome); ++lvl) {
            ctx[outcome] = lvl;
            num += static_cast<double>(lvl) * joint.mass(ctx);
          }
          term = gw * (hist * (num / denom));
        } else {
          term = gw * hist;
        }
        total += term;
        return;
      }
      for (int lvl = 0; lvl < block_sizes[s][b]; ++lvl) {
        blocks[s][b] = lvl;
        rec_blocks(s, b + 1);
      }
    };
    rec_blocks(0, 0);
  };
  rec_actions(0);
  return total;
}

}  // namespace detail

/** Static-regime longitudinal functional evaluated on an exact joint. */
inline double sequential_functional(const ProbTable& joint, const std::vector<Phase>& phases,
                                    const Regime& regime, const std::string& outcome) {
  if (regime.size() != phases.size())
    fail(ErrorCode::bad_argument, "regime length must match the number of phases");
  auto act = [&regime](const std::vector<int>& actions, const std::vector<std::vector<int>>&) {
    return actions == regime ? 1.0 : 0.0;
  };
  return detail::exact_sequential_sum(joint, phases, outcome, act, true);
}

namespace detail {
inline double policy_prob(const std::vector<Phase>& phases, const PolicySpec& policy,
                          std::size_t t, const std::vector<int>& actions,
                          const std::vector<std::vector<int>>& blocks) {
  std::map<std::string, int> env;
  for (std::size_t s = 0; s < t; ++s) env[phases[s].treatment] = actions[s];
  for (std::size_t s = 0; s <= t; ++s)
    for (std::size_t i = 0; i < phases[s].covariates.size(); ++i)
      env[phases[s].covariates[i]] = blocks[s][i];
  std::vector<int> key;
  for (const auto& v : policy[t].given) key.push_back(env.at(v));
  auto it = policy[t].table.find(key);
  if (it == policy[t].table.end())
    fail(ErrorCode::bad_argument, "policy table misses a conditioning combination");
  return it->second[static_cast<std::size_t>(actions[t])];
}
}  // namespace detail

/** Policy-value functional on an exact joint. */
inline double policy_functional(const ProbTable& joint, const std::vector<Phase>& phases,
                                const PolicySpec& policy, const std::string& outcome) {
  auto act = [&](const std::vector<int>& actions, const std::vector<std::vector<int>>& blocks) {
    double g = 1.0;
    for (std::size_t t = 0; t < phases.size() && g != 0.0; ++t)
      g *= detail::policy_prob(phases, policy, t, actions, blocks);
    return g;
  };
  return detail::exact_sequential_sum(joint, phases, outcome, act, true);
}

/** Total mass of the policy-weighted history factorization; 1 for any proper
 * policy on an exact joint. */
inline double policy_weight_total(const ProbTable& joint, const std::vector<Phase>& phases,
                                  const PolicySpec& policy) {
  auto act = [&](const std::vector<int>& actions, const std::vector<std::vector<int>>& blocks) {
    double g = 1.0;
    for (std::size_t t = 0; t < phases.size() && g != 0.0; ++t)
      g *= detail::policy_prob(phases, policy, t, actions, blocks);
    return g;
  };
  return detail::exact_sequential_sum(joint, phases, "", act, false);
}

}  // namespace causal
