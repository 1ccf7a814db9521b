#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causal/dataset.hpp"
#include "causal/error.hpp"
#include "causal/identify.hpp"
#include "causal/models.hpp"
#include "causal/prob_table.hpp"
#include "causal/rng.hpp"

namespace causal {

struct PositivityEntry {
  std::map<std::string, int> stratum;
  int treatment_level = 0;
  double frequency = 0.0;
};

struct WeightSummary {
  double min = 0.0, max = 0.0, mean = 0.0, sum = 0.0;
  double normalized_sum = 0.0;  // stabilized weights, sums to the arm size
  std::size_t clipped = 0;
};

struct Interval {
  double lower = 0.0, upper = 0.0, level = 0.95;
};

struct Diagnostics {
  std::vector<PositivityEntry> positivity;
  std::optional<WeightSummary> weights;
  std::optional<ConvergenceReport> model;
  std::optional<std::pair<double, double>> propensity_range;
  std::vector<std::string> notes;
};

struct EffectEstimate {
  double point = 0.0;
  std::optional<Interval> ci;
  std::string method;
  std::size_t n = 0;
  Diagnostics diagnostics;
};

struct OutcomeModel {
  enum Kind { automatic, saturated, linear, constant } kind = automatic;
  double constant_value = 0.0;
  bool ridge_rescue = false;
  bool continuous_positivity_waiver = false;
};

struct PropensityModel {
  enum Kind { saturated, logistic, known } kind = saturated;
  double known_value = 0.0;   // p(A = a | anything), for designed experiments
  double clip_epsilon = 0.01;
  bool stabilized = false;
};

namespace detail {

struct PhaseVars {
  std::string treatment;
  std::vector<std::string> block;
};

/**
 * Count tables for the stratified sequential plug-in. Every saturated
 * estimator in the library routes through walk() so that the algebraic
 * identities between them hold bit-for-bit.
 */
class SequentialTables {
 public:
  SequentialTables(const Dataset& data, const std::vector<PhaseVars>& phases,
                   const std::string& outcome)
      : phases_(phases) {
    n_ = data.n();
    for (const auto& ph : phases_) {
      if (!data.is_categorical(ph.treatment))
        fail(ErrorCode::continuous_variable, ph.treatment + " must be categorical");
      treatment_levels_.push_back(data.levels_of(ph.treatment));
      std::vector<int> sizes;
      for (const auto& b : ph.block) {
        if (!data.is_categorical(b))
          fail(ErrorCode::continuous_variable, b + " must be categorical");
        sizes.push_back(data.levels_of(b));
      }
      block_levels_.push_back(std::move(sizes));
    }
    m_counts_.resize(phases_.size());
    q_counts_.resize(phases_.size());
    std::vector<int> key;
    for (std::size_t r = 0; r < data.n(); ++r) {
      key.clear();
      for (std::size_t t = 0; t < phases_.size(); ++t) {
        for (const auto& b : phases_[t].block) key.push_back(data.level_at(b, r));
        m_counts_[t][key]++;
        key.push_back(data.level_at(phases_[t].treatment, r));
        q_counts_[t][key]++;
      }
      auto& cell = y_[key];
      cell.first++;
      cell.second += data.column(outcome)[r];
    }
  }

  std::size_t n() const { return n_; }
  const std::vector<int>& treatment_levels() const { return treatment_levels_; }
  const std::vector<std::vector<int>>& block_levels() const { return block_levels_; }

  /**
   * Plug-in value for a fixed action sequence:
   * sum over covariate combinations of prod_t p-hat(l_t | past) * mean(Y | all).
   * Unseen histories carry zero weight and are skipped; a seen history with no
   * rows at the required action is a positivity violation.
   */
  double walk(const std::vector<int>& regime,
              std::vector<PositivityEntry>* violations = nullptr) const {
    double total = 0.0;
    std::vector<int> combo(total_block_vars(), 0);
    bool more = true;
    while (more) {
      accumulate(regime, combo, 1.0, total, violations);
      more = advance(combo);
    }
    if (violations && !violations->empty())
      fail(ErrorCode::positivity,
           "positivity violation: observed history lacks rows at the required action");
    return total;
  }

  /** As walk(), but each term additionally weighted by a caller-supplied
   * action probability; zero-weight branches are skipped untouched. */
  double walk_policy(
      const std::function<double(std::size_t t, const std::vector<int>& treat_prefix,
                                 const std::vector<int>& combo, int action)>& g,
      std::vector<PositivityEntry>* violations = nullptr) const {
    double total = 0.0;
    std::vector<int> regime(phases_.size(), 0);
    walk_actions(0, regime, g, total, violations);
    if (violations && !violations->empty())
      fail(ErrorCode::positivity,
           "positivity violation: policy-reachable history lacks rows at the required action");
    return total;
  }

 private:
  std::size_t total_block_vars() const {
    std::size_t k = 0;
    for (const auto& b : block_levels_) k += b.size();
    return k;
  }

  bool advance(std::vector<int>& combo) const {
    std::size_t i = combo.size();
    std::vector<int> flat_sizes;
    for (const auto& b : block_levels_)
      for (int s : b) flat_sizes.push_back(s);
    while (i-- > 0) {
      if (++combo[i] < flat_sizes[i]) return true;
      combo[i] = 0;
    }
    return false;
  }

  void accumulate(const std::vector<int>& regime, const std::vector<int>& combo,
                  double action_weight, double& total,
                  std::vector<PositivityEntry>* violations) const {
    std::vector<int> key;
    double weight = 1.0;
    double q_prev = static_cast<double>(n_);
    std::size_t ci = 0;
    for (std::size_t t = 0; t < phases_.size(); ++t) {
      for (std::size_t b = 0; b < block_levels_[t].size(); ++b) key.push_back(combo[ci++]);
      auto mit = m_counts_[t].find(key);
      std::size_t m = mit == m_counts_[t].end() ? 0 : mit->second;
      if (m == 0) return;  // history never observed: zero weight
      weight = weight * (static_cast<double>(m) / q_prev);
      key.push_back(regime[t]);
      auto qit = q_counts_[t].find(key);
      std::size_t q = qit == q_counts_[t].end() ? 0 : qit->second;
      if (q == 0) {
        if (violations) {
          PositivityEntry e;
          std::size_t cj = 0;
          for (std::size_t s = 0; s <= t; ++s)
            for (std::size_t b = 0; b < block_levels_[s].size(); ++b)
              e.stratum[phases_[s].block[b]] = combo[cj++];
          for (std::size_t s = 0; s < t; ++s) e.stratum[phases_[s].treatment] = regime[s];
          e.treatment_level = regime[t];
          e.frequency = 0.0;
          violations->push_back(e);
          return;
        }
        fail(ErrorCode::positivity,
             "positivity violation: observed history lacks rows at the required action");
      }
      q_prev = static_cast<double>(q);
    }
    const auto& cell = y_.at(key);
    double mean = cell.second / static_cast<double>(cell.first);
    total += action_weight * (weight * mean);
  }

  void walk_actions(std::size_t t, std::vector<int>& regime,
                    const std::function<double(std::size_t, const std::vector<int>&,
                                               const std::vector<int>&, int)>& g,
                    double& total, std::vector<PositivityEntry>* violations) const {
    if (t == phases_.size()) {
      std::vector<int> combo(total_block_vars(), 0);
      bool more = true;
      while (more) {
        double gw = 1.0;
        std::vector<int> prefix;
        for (std::size_t s = 0; s < phases_.size() && gw != 0.0; ++s) {
          gw *= g(s, prefix, combo, regime[s]);
          prefix.push_back(regime[s]);
        }
        if (gw != 0.0) accumulate(regime, combo, gw, total, violations);
        more = advance(combo);
      }
      return;
    }
    for (int a = 0; a < treatment_levels_[t]; ++a) {
      regime[t] = a;
      walk_actions(t + 1, regime, g, total, violations);
    }
  }

  std::vector<PhaseVars> phases_;
  std::vector<int> treatment_levels_;
  std::vector<std::vector<int>> block_levels_;
  std::size_t n_ = 0;
  std::vector<std::map<std::vector<int>, std::size_t>> m_counts_;
  std::vector<std::map<std::vector<int>, std::size_t>> q_counts_;
  std::map<std::vector<int>, std::pair<std::size_t, double>> y_;
};

inline int require_level(const Dataset& data, const std::string& var, int level) {
  int k = data.levels_of(var);
  if (level < 0 || level >= k)
    fail(ErrorCode::value_out_of_domain,
         "level " + std::to_string(level) + " out of range for " + var);
  return k;
}

}  // namespace detail

/** Per-stratum treatment frequencies below epsilon, over strata present in the data. */
inline std::vector<PositivityEntry> check_positivity(const Dataset& data, const std::string& a,
                                                     const std::vector<std::string>& w,
                                                     double epsilon) {
  int ka = data.levels_of(a);
  for (const auto& v : w) data.levels_of(v);
  std::map<std::vector<int>, std::vector<std::size_t>> strata;  // w-levels -> per-a counts
  std::map<std::vector<int>, std::size_t> totals;
  std::vector<int> key;
  for (std::size_t r = 0; r < data.n(); ++r) {
    key.clear();
    for (const auto& v : w) key.push_back(data.level_at(v, r));
    auto& counts = strata[key];
    if (counts.empty()) counts.assign(static_cast<std::size_t>(ka), 0);
    counts[static_cast<std::size_t>(data.level_at(a, r))]++;
    totals[key]++;
  }
  std::vector<PositivityEntry> out;
  for (const auto& [levels, counts] : strata) {
    double total = static_cast<double>(totals[levels]);
    for (int lvl = 0; lvl < ka; ++lvl) {
      double freq = static_cast<double>(counts[static_cast<std::size_t>(lvl)]) / total;
      if (freq < epsilon) {
        PositivityEntry e;
        for (std::size_t i = 0; i < w.size(); ++i) e.stratum[w[i]] = levels[i];
        e.treatment_level = lvl;
        e.frequency = freq;
        out.push_back(e);
      }
    }
  }
  return out;
}

/** Unadjusted contrast mean(Y | A=1) - mean(Y | A=0). */
inline EffectEstimate diff_in_means(const Dataset& data, const std::string& a,
                                    const std::string& y) {
  if (data.levels_of(a) != 2)
    fail(ErrorCode::bad_argument, "diff_in_means expects a binary treatment");
  detail::SequentialTables tables(data, {{a, {}}}, y);
  std::vector<PositivityEntry> violations;
  EffectEstimate est;
  est.method = "diff_in_means";
  est.n = data.n();
  double m1 = tables.walk({1}, &violations);
  double m0 = tables.walk({0}, &violations);
  est.point = m1 - m0;
  return est;
}

/** Plug-in mean E[Y(a)] for a single-phase estimand: fit E[Y|A,W], average
 * predictions at A=a over the covariate distribution. */
inline EffectEstimate gformula_mean(const Dataset& data, const Estimand& est, int a,
                                    const OutcomeModel& model = {}) {
  if (est.kind != EstimandKind::backdoor && est.kind != EstimandKind::randomized)
    fail(ErrorCode::bad_argument, "gformula_mean needs a backdoor or randomized estimand");
  const std::string& treat = est.treatment;
  const std::string& outcome = est.outcome;
  detail::require_level(data, treat, a);
  std::vector<std::string> w = est.adjustment;
  bool all_cat = data.is_categorical(treat);
  for (const auto& v : w) all_cat = all_cat && data.is_categorical(v);
  OutcomeModel::Kind kind = model.kind;
  if (kind == OutcomeModel::automatic) kind = all_cat ? OutcomeModel::saturated : OutcomeModel::linear;

  EffectEstimate out;
  out.method = "gformula";
  out.n = data.n();
  if (kind == OutcomeModel::constant) {
    out.point = model.constant_value;
    out.diagnostics.notes.push_back("constant outcome model");
    return out;
  }
  if (kind == OutcomeModel::saturated) {
    if (!all_cat)
      fail(ErrorCode::continuous_variable, "saturated outcome model requires categorical A and W");
    detail::SequentialTables tables(data, {{treat, w}}, outcome);
    std::vector<PositivityEntry> violations;
    out.point = tables.walk({a}, &violations);
    return out;
  }
  // linear outcome model; structural positivity check replaced by a waiver +
  // propensity-range diagnostic when covariates are continuous
  if (!all_cat && !model.continuous_positivity_waiver)
    fail(ErrorCode::positivity,
         "continuous covariates: set the positivity waiver to use the linear model");
  std::vector<std::string> predictors{treat};
  for (const auto& v : w) predictors.push_back(v);
  FittedRegression fit = fit_linear(data, outcome, predictors, model.ridge_rescue);
  out.diagnostics.model = fit.report();
  double sum = 0.0;
  std::map<std::string, double> row;
  for (std::size_t r = 0; r < data.n(); ++r) {
    row.clear();
    row[treat] = static_cast<double>(a);
    for (const auto& v : w) row[v] = data.column(v)[r];
    sum += fit.predict(row);
  }
  out.point = sum / static_cast<double>(data.n());
  if (!all_cat && data.is_categorical(treat) && data.levels_of(treat) == 2) {
    std::vector<std::string> wpred(w.begin(), w.end());
    FittedRegression prop = fit_logistic(data, treat, wpred, true);
    double lo = 1.0, hi = 0.0;
    std::map<std::string, double> prow;
    for (std::size_t r = 0; r < data.n(); ++r) {
      prow.clear();
      for (const auto& v : w) prow[v] = data.column(v)[r];
      double p = prop.predict(prow);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    out.diagnostics.propensity_range = {lo, hi};
  }
  return out;
}

/** Inverse-probability weighting: (1/n) sum Y_i 1[A_i=a] / p-hat(A=a|W_i),
 * or the weight-normalized version when stabilized. */
inline EffectEstimate ipw_mean(const Dataset& data, const Estimand& est, int a,
                               const PropensityModel& model = {}) {
  if (est.kind != EstimandKind::backdoor && est.kind != EstimandKind::randomized)
    fail(ErrorCode::bad_argument, "ipw_mean needs a backdoor or randomized estimand");
  const std::string& treat = est.treatment;
  const std::string& outcome = est.outcome;
  detail::require_level(data, treat, a);
  const std::vector<std::string>& w = est.adjustment;
  const std::size_t n = data.n();
  const double eps = model.clip_epsilon;
  if (eps <= 0.0 || eps >= 0.5) fail(ErrorCode::bad_argument, "clip epsilon must be in (0, 0.5)");

  std::vector<double> p(n, 0.0);
  if (model.kind == PropensityModel::known) {
    if (model.known_value <= 0.0 || model.known_value >= 1.0)
      fail(ErrorCode::bad_argument, "known propensity must be in (0,1)");
    std::fill(p.begin(), p.end(), model.known_value);
  } else if (model.kind == PropensityModel::saturated) {
    EmpiricalCPT cpt = fit_cpt(data, treat, w, 0.0);
    std::vector<int> key(w.size());
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < w.size(); ++i) key[i] = data.level_at(w[i], r);
      p[r] = cpt.prob(a, key);
    }
  } else {
    if (data.levels_of(treat) != 2)
      fail(ErrorCode::bad_argument, "logistic propensity requires a binary treatment");
    FittedRegression prop = fit_logistic(data, treat, w, true);
    std::map<std::string, double> row;
    for (std::size_t r = 0; r < n; ++r) {
      row.clear();
      for (const auto& v : w) row[v] = data.column(v)[r];
      double p1 = prop.predict(row);
      p[r] = a == 1 ? p1 : 1.0 - p1;
    }
  }

  std::size_t below = 0;
  for (std::size_t r = 0; r < n; ++r)
    if (p[r] < eps) ++below;
  if (static_cast<double>(below) > 0.05 * static_cast<double>(n)) {
    fail(ErrorCode::positivity, "estimated propensity below " + std::to_string(eps) + " for " +
                                    std::to_string(below) + " of " + std::to_string(n) + " rows");
  }

  const auto& acol = data.column(treat);
  const auto& ycol = data.column(outcome);
  double arm_count = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    if (static_cast<int>(acol[r]) == a) arm_count += 1.0;
  double marginal = arm_count / static_cast<double>(n);

  WeightSummary ws;
  ws.min = std::numeric_limits<double>::infinity();
  ws.max = 0.0;
  double wsum = 0.0, ysum = 0.0;
  std::size_t used = 0;
  for (std::size_t r = 0; r < n; ++r) {
    double pr = p[r];
    if (pr < eps) {
      pr = eps;
      if (static_cast<int>(acol[r]) == a) ++ws.clipped;
    }
    if (static_cast<int>(acol[r]) != a) continue;
    double weight = 1.0 / pr;
    ws.min = std::min(ws.min, weight);
    ws.max = std::max(ws.max, weight);
    wsum += weight;
    ysum += ycol[r] * weight;
    ++used;
  }
  if (used == 0) fail(ErrorCode::positivity, "no rows at the requested treatment level");
  ws.sum = wsum;
  ws.mean = wsum / static_cast<double>(used);
  ws.normalized_sum = marginal * wsum;

  EffectEstimate out;
  out.method = "ipw";
  out.n = n;
  out.point = model.stabilized ? ysum / wsum : ysum / static_cast<double>(n);
  out.diagnostics.weights = ws;
  return out;
}

/** Source-fitted outcome model averaged over the target covariate sample. */
inline EffectEstimate transport_mean(const Dataset& source, const Dataset& target,
                                     const Estimand& est, int a,
                                     const OutcomeModel& model = {}) {
  if (est.kind != EstimandKind::transport)
    fail(ErrorCode::bad_argument, "transport_mean needs a transport estimand");
  const std::string& treat = est.treatment;
  const std::string& outcome = est.outcome;
  const std::vector<std::string>& w = est.adjustment;
  for (const auto& v : w)
    if (source.type_of(v) != target.type_of(v))
      fail(ErrorCode::schema_mismatch, "covariate schema differs between populations: " + v);
  if (target.has_column(treat) && source.type_of(treat) != target.type_of(treat))
    fail(ErrorCode::schema_mismatch, "treatment schema differs between populations");
  detail::require_level(source, treat, a);

  bool all_cat = source.is_categorical(treat);
  for (const auto& v : w) all_cat = all_cat && source.is_categorical(v);
  OutcomeModel::Kind kind = model.kind;
  if (kind == OutcomeModel::automatic) kind = all_cat ? OutcomeModel::saturated : OutcomeModel::linear;

  EffectEstimate out;
  out.method = "transport";
  out.n = target.n();
  if (kind == OutcomeModel::saturated) {
    if (!all_cat)
      fail(ErrorCode::continuous_variable, "saturated outcome model requires categorical A and W");
    // source stratum means under A=a, averaged with target stratum shares;
    // arithmetic mirrors the single-phase plug-in so that the same-population
    // case reproduces it exactly
    std::map<std::vector<int>, std::size_t> tgt_counts;
    std::vector<int> key;
    for (std::size_t r = 0; r < target.n(); ++r) {
      key.clear();
      for (const auto& v : w) key.push_back(target.level_at(v, r));
      tgt_counts[key]++;
    }
    std::map<std::vector<int>, std::pair<std::size_t, double>> src_cells;
    for (std::size_t r = 0; r < source.n(); ++r) {
      if (source.level_at(treat, r) != a) continue;
      key.clear();
      for (const auto& v : w) key.push_back(source.level_at(v, r));
      auto& cell = src_cells[key];
      cell.first++;
      cell.second += source.column(outcome)[r];
    }
    double total = 0.0;
    for (const auto& [levels, count] : tgt_counts) {
      auto it = src_cells.find(levels);
      if (it == src_cells.end()) {
        std::string desc;
        for (std::size_t i = 0; i < w.size(); ++i)
          desc += (i ? "," : "") + w[i] + "=" + std::to_string(levels[i]);
        fail(ErrorCode::positivity,
             "target stratum {" + desc + "} has no source rows at the requested action");
      }
      double weight = 1.0 * (static_cast<double>(count) / static_cast<double>(target.n()));
      double mean = it->second.second / static_cast<double>(it->second.first);
      total += weight * mean;
    }
    out.point = total;
    return out;
  }
  if (kind == OutcomeModel::constant) {
    out.point = model.constant_value;
    return out;
  }
  if (!all_cat && !model.continuous_positivity_waiver)
    fail(ErrorCode::positivity,
         "continuous covariates: set the positivity waiver to use the linear model");
  std::vector<std::string> predictors{treat};
  for (const auto& v : w) predictors.push_back(v);
  FittedRegression fit = fit_linear(source, outcome, predictors, model.ridge_rescue);
  out.diagnostics.model = fit.report();
  double sum = 0.0;
  std::map<std::string, double> row;
  for (std::size_t r = 0; r < target.n(); ++r) {
    row.clear();
    row[treat] = static_cast<double>(a);
    for (const auto& v : w) row[v] = target.column(v)[r];
    sum += fit.predict(row);
  }
  out.point = sum / static_cast<double>(target.n());
  return out;
}

/** Percentile bootstrap confidence interval, deterministic in the seed. */
inline Interval bootstrap_ci(const std::function<double(const Dataset&)>& estimator,
                             const Dataset& data, int b, double level, std::uint64_t seed) {
  if (b < 100) fail(ErrorCode::bad_argument, "bootstrap needs at least 100 replicates");
  if (level <= 0.0 || level >= 1.0) fail(ErrorCode::bad_argument, "level must be in (0,1)");
  Rng rng = make_rng(seed);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(b));
  std::vector<std::size_t> rows(data.n());
  for (int rep = 0; rep < b; ++rep) {
    for (std::size_t i = 0; i < data.n(); ++i) rows[i] = uniform_below(rng, data.n());
    try {
      stats.push_back(estimator(data.resample(rows)));
    } catch (const Error& e) {
      fail(ErrorCode::estimator_failed_on_resample,
           "estimator failed on resample " + std::to_string(rep) + ": " + e.what());
    }
  }
  std::sort(stats.begin(), stats.end());
  auto quantile = [&stats](double q) {
    double h = q * static_cast<double>(stats.size() - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    std::size_t hi = std::min(lo + 1, stats.size() - 1);
    double frac = h - static_cast<double>(lo);
    return stats[lo] * (1.0 - frac) + stats[hi] * frac;
  };
  Interval ci;
  ci.level = level;
  ci.lower = quantile((1.0 - level) / 2.0);
  ci.upper = quantile((1.0 + level) / 2.0);
  return ci;
}

/** Two-sample bootstrap: source and target resampled independently. */
inline Interval bootstrap_ci(
    const std::function<double(const Dataset&, const Dataset&)>& estimator,
    const Dataset& source, const Dataset& target, int b, double level, std::uint64_t seed) {
  if (b < 100) fail(ErrorCode::bad_argument, "bootstrap needs at least 100 replicates");
  if (level <= 0.0 || level >= 1.0) fail(ErrorCode::bad_argument, "level must be in (0,1)");
  Rng rng = make_rng(seed);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(b));
  std::vector<std::size_t> srows(source.n()), trows(target.n());
  for (int rep = 0; rep < b; ++rep) {
    for (std::size_t i = 0; i < source.n(); ++i) srows[i] = uniform_below(rng, source.n());
    for (std::size_t i = 0; i < target.n(); ++i) trows[i] = uniform_below(rng, target.n());
    try {
      stats.push_back(estimator(source.resample(srows), target.resample(trows)));
    } catch (const Error& e) {
      fail(ErrorCode::estimator_failed_on_resample,
           "estimator failed on resample " + std::to_string(rep) + ": " + e.what());
    }
  }
  std::sort(stats.begin(), stats.end());
  auto quantile = [&stats](double q) {
    double h = q * static_cast<double>(stats.size() - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    std::size_t hi = std::min(lo + 1, stats.size() - 1);
    double frac = h - static_cast<double>(lo);
    return stats[lo] * (1.0 - frac) + stats[hi] * frac;
  };
  Interval ci;
  ci.level = level;
  ci.lower = quantile((1.0 - level) / 2.0);
  ci.upper = quantile((1.0 + level) / 2.0);
  return ci;
}

// ---- exact-distribution functionals ----------------------------------------

/** sum_w p(w) E[Y | A=a, w] on an exact joint table. */
inline double gformula_functional(const ProbTable& joint, const std::string& a_var, int a,
                                  const std::string& y, const std::vector<std::string>& w) {
  int ky = joint.size_of(y);
  std::vector<int> wsizes;
  for (const auto& v : w) wsizes.push_back(joint.size_of(v));
  std::vector<int> combo(w.size(), 0);
  double total = 0.0;
  bool more = true;
  while (more) {
    std::map<std::string, int> ctx;
    for (std::size_t i = 0; i < w.size(); ++i) ctx[w[i]] = combo[i];
    double pw = w.empty() ? 1.0 : joint.mass(ctx);
    if (pw > 0.0) {
      ctx[a_var] = a;
      double paw = joint.mass(ctx);
      if (paw <= 0.0) fail(ErrorCode::positivity, "functional undefined: p(a|w) = 0");
      double ey = 0.0;
      for (int lvl = 0; lvl < ky; ++lvl) {
        ctx[y] = lvl;
        ey += static_cast<double>(lvl) * joint.mass(ctx);
      }
      ctx.erase(y);
      total += pw * (ey / paw);
    }
    std::size_t i = combo.size();
    more = false;
    while (i-- > 0) {
      if (++combo[i] < wsizes[i]) {
        more = true;
        break;
      }
      combo[i] = 0;
    }
    if (combo.empty()) break;
  }
  return total;
}

/** sum_{y,w} y p(y, A=a, w) / p(A=a | w) on an exact joint table. */
inline double ipw_functional(const ProbTable& joint, const std::string& a_var, int a,
                             const std::string& y, const std::vector<std::string>& w) {
  int ky = joint.size_of(y);
  std::vector<int> wsizes;
  for (const auto& v : w) wsizes.push_back(joint.size_of(v));
  std::vector<int> combo(w.size(), 0);
  double total = 0.0;
  bool more = true;
  while (more) {
    std::map<std::string, int> ctx;
    for (std::size_t i = 0; i < w.size(); ++i) ctx[w[i]] = combo[i];
    double pw = w.empty() ? 1.0 : joint.mass(ctx);
    if (pw > 0.0) {
      ctx[a_var] = a;
      double paw = joint.mass(ctx);
      if (paw <= 0.0) fail(ErrorCode::positivity, "functional undefined: p(a|w) = 0");
      double p_a_given_w = paw / pw;
      for (int lvl = 0; lvl < ky; ++lvl) {
        ctx[y] = lvl;
        total += static_cast<double>(lvl) * joint.mass(ctx) / p_a_given_w;
      }
      ctx.erase(y);
    }
    std::size_t i = combo.size();
    more = false;
    while (i-- > 0) {
      if (++combo[i] < wsizes[i]) {
        more = true;
        break;
      }
      combo[i] = 0;
    }
    if (combo.empty()) break;
  }
  return total;
}

}  // namespace causal
