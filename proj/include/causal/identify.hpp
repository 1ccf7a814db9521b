#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causal/error.hpp"
#include "causal/graph.hpp"

namespace causal {

enum class EstimandKind { randomized, backdoor, transport, sequential, not_identified };

/** One decision point: a treatment and the covariate block observed before it. */
struct Phase {
  std::string treatment;
  std::vector<std::string> covariates;
  friend bool operator==(const Phase&, const Phase&) = default;
};

/**
 * Identification result: which adjustment licenses the causal query, plus the
 * ingredients needed to render the estimation functional as text.
 */
struct Estimand {
  EstimandKind kind = EstimandKind::not_identified;
  std::string outcome;
  std::string treatment;               // static kinds
  std::string value_label;             // e.g. "a" or "1"
  std::vector<std::string> adjustment; // backdoor / transport, sorted
  std::string source_tag = "source";   // transport
  std::string target_tag = "target";   // transport
  bool assumes_shared_mechanism = false;
  std::vector<Phase> phases;           // sequential
  std::string reason;                  // not_identified

  std::string text() const {
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
      return s;
    };
    switch (kind) {
      case EstimandKind::randomized:
        return "p(" + outcome + "|" + treatment + "=" + value_label + ")";
      case EstimandKind::backdoor:
      case EstimandKind::transport: {
        std::string w = join(adjustment);
        std::string star = kind == EstimandKind::transport ? "*" : "";
        if (adjustment.empty())
          return "p" + star + "(" + outcome + "|" + treatment + "=" + value_label + ")";
        return "sum_{" + w + "} p(" + outcome + "|" + treatment + "=" + value_label + "," + w +
               ") p" + star + "(" + w + ")";
      }
      case EstimandKind::sequential: {
        std::vector<std::string> all_cov;
        std::string cond;
        for (std::size_t t = 0; t < phases.size(); ++t) {
          if (!cond.empty()) cond += ",";
          cond += phases[t].treatment + "=a_" + std::to_string(t);
          for (const auto& c : phases[t].covariates) all_cov.push_back(c);
        }
        std::string head = "E[" + outcome + "|" + cond +
                           (all_cov.empty() ? "" : "," + join(all_cov)) + "]";
        std::string factors;
        std::vector<std::string> past_cov;
        std::string past_treat;
        for (std::size_t t = 0; t < phases.size(); ++t) {
          if (!phases[t].covariates.empty()) {
            std::string given = past_treat;
            if (!past_cov.empty()) given += (given.empty() ? "" : ",") + join(past_cov);
            factors += " p(" + join(phases[t].covariates) +
                       (given.empty() ? "" : "|" + given) + ")";
          }
          if (!past_treat.empty()) past_treat += ",";
          past_treat += phases[t].treatment + "=a_" + std::to_string(t);
          for (const auto& c : phases[t].covariates) past_cov.push_back(c);
        }
        if (all_cov.empty()) return head;
        return "sum_{" + join(all_cov) + "} " + head + factors;
      }
      case EstimandKind::not_identified:
        return "not identified: " + reason;
    }
    return "";
  }
};

namespace detail {
inline void require_known_observed(const Graph& g, const std::string& name) {
  if (!g.is_observed(name)) fail(ErrorCode::unobserved_variable, name + " is unobserved");
}
}  // namespace detail

/**
 * Backdoor criterion: W contains no descendant of the treatment, and W blocks
 * every path into the treatment, checked as separation in the graph with the
 * treatment's outgoing edges removed.
 */
inline bool verify_backdoor(const Graph& g, const std::string& a, const std::string& y,
                            const std::set<std::string>& w) {
  detail::require_known_observed(g, a);
  detail::require_known_observed(g, y);
  if (a == y) fail(ErrorCode::overlapping_sets, "treatment equals outcome");
  if (w.count(a) || w.count(y))
    fail(ErrorCode::overlapping_sets, "adjustment set overlaps treatment or outcome");
  for (const auto& v : w)
    if (!g.is_observed(v))
      fail(ErrorCode::unobserved_in_adjustment, "adjustment set contains unobserved " + v);
  std::set<std::string> de = g.descendants({a});
  for (const auto& v : w)
    if (de.count(v)) return false;
  return g.without_out_edges({a}).d_separated({a}, {y}, w);
}

/**
 * Smallest valid adjustment set: exhaustive search over observed
 * non-descendants of the treatment, subsets ordered by size then
 * lexicographically; the first success is returned.
 */
inline std::optional<std::set<std::string>> find_backdoor_set(const Graph& g, const std::string& a,
                                                              const std::string& y) {
  detail::require_known_observed(g, a);
  detail::require_known_observed(g, y);
  std::set<std::string> de = g.descendants({a});
  std::vector<std::string> cand;
  for (const auto& name : g.observed_variables())
    if (name != a && name != y && !de.count(name)) cand.push_back(name);  // already sorted
  const std::size_t n = cand.size();
  auto next_combination = [n](std::vector<std::size_t>& pick) {
    const std::size_t k = pick.size();
    for (std::size_t i = k; i-- > 0;) {
      if (pick[i] < i + n - k) {
        ++pick[i];
        for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
        return true;
      }
    }
    return false;
  };
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    do {
      std::set<std::string> w;
      for (std::size_t i : pick) w.insert(cand[i]);
      if (verify_backdoor(g, a, y, w)) return w;
    } while (next_combination(pick));
  }
  return std::nullopt;
}

/**
 * Point-treatment identification: randomized when nothing points into the
 * treatment; otherwise the smallest backdoor adjustment; otherwise not
 * identified.
 */
inline Estimand identify_effect(const Graph& g, const std::string& a, const std::string& a_label,
                                const std::string& y) {
  detail::require_known_observed(g, a);
  detail::require_known_observed(g, y);
  if (a == y) fail(ErrorCode::overlapping_sets, "treatment equals outcome");
  Estimand e;
  e.outcome = y;
  e.treatment = a;
  e.value_label = a_label;
  if (g.parents_of(a).empty() && g.siblings_of(a).empty()) {
    e.kind = EstimandKind::randomized;
    return e;
  }
  if (auto w = find_backdoor_set(g, a, y)) {
    e.kind = EstimandKind::backdoor;
    e.adjustment.assign(w->begin(), w->end());
    return e;
  }
  e.kind = EstimandKind::not_identified;
  e.reason = "latent backdoor path, backdoor criterion inapplicable";
  return e;
}

/**
 * Transport of a backdoor-adjusted effect to a target population: source
 * conditionals combined with the target covariate marginal. The shared
 * outcome-mechanism assumption is untestable and is recorded on the estimand.
 */
inline Estimand identify_transport(const Graph& g, const std::string& a,
                                   const std::string& a_label, const std::string& y,
                                   const std::set<std::string>& w,
                                   std::string source_tag = "source",
                                   std::string target_tag = "target") {
  Estimand e;
  e.outcome = y;
  e.treatment = a;
  e.value_label = a_label;
  e.source_tag = std::move(source_tag);
  e.target_tag = std::move(target_tag);
  if (!verify_backdoor(g, a, y, w)) {
    e.kind = EstimandKind::not_identified;
    e.reason = "adjustment set fails the backdoor criterion on the shared graph";
    return e;
  }
  e.kind = EstimandKind::transport;
  e.adjustment.assign(w.begin(), w.end());
  e.assumes_shared_mechanism = true;
  return e;
}

/**
 * Longitudinal identification: validates temporal consistency of the declared
 * phases, then checks in the all-treatments-intervened world that each
 * treatment is separated from the outcome given its declared past.
 */
inline Estimand identify_sequential(const Graph& g, const std::vector<Phase>& phases,
                                    const std::string& y) {
  if (phases.empty()) fail(ErrorCode::bad_argument, "no phases given");
  detail::require_known_observed(g, y);
  std::set<std::string> seen{y};
  std::set<std::string> treatments;
  for (const auto& ph : phases) {
    detail::require_known_observed(g, ph.treatment);
    if (!seen.insert(ph.treatment).second)
      fail(ErrorCode::overlapping_sets, ph.treatment + " appears twice in the phase list");
    treatments.insert(ph.treatment);
    for (const auto& c : ph.covariates) {
      detail::require_known_observed(g, c);
      if (!seen.insert(c).second)
        fail(ErrorCode::overlapping_sets, c + " appears twice in the phase list");
    }
  }
  // temporal order: nothing may causally precede its own past
  std::vector<std::vector<std::string>> stages;
  for (const auto& ph : phases) {
    stages.emplace_back(ph.covariates);
    stages.push_back({ph.treatment});
  }
  stages.push_back({y});
  for (std::size_t j = 1; j < stages.size(); ++j)
    for (const auto& later : stages[j]) {
      std::set<std::string> de = g.descendants({later});
      for (std::size_t i = 0; i < j; ++i)
        for (const auto& earlier : stages[i])
          if (de.count(earlier))
            fail(ErrorCode::order_violation,
                 later + " has a directed path to the earlier " + earlier);
    }
  // sequential ignorability in the intervened world
  Graph swig_view = g.without_out_edges(treatments);
  std::set<std::string> past;
  for (std::size_t t = 0; t < phases.size(); ++t) {
    for (const auto& c : phases[t].covariates) past.insert(c);
    if (!swig_view.d_separated({phases[t].treatment}, {y}, past))
      fail(ErrorCode::sequential_ignorability,
           "phase " + std::to_string(t) + ": the declared past of " + phases[t].treatment +
               " does not block all paths to " + y);
    past.insert(phases[t].treatment);
  }
  Estimand e;
  e.kind = EstimandKind::sequential;
  e.outcome = y;
  e.phases = phases;
  return e;
}

}  // namespace causal
