#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causal/dataset.hpp"
#include "causal/error.hpp"

namespace causal {

struct ConvergenceReport {
  int iterations = 0;
  double gradient_norm = 0.0;
  bool ridge_applied = false;
};

/**
 * Linear or logistic fit with a fixed encoding: intercept first, then each
 * predictor in declaration order; categorical predictors one-hot with level 0
 * as the reference. Prediction rows must supply every predictor.
 */
class FittedRegression {
 public:
  bool logistic() const { return logistic_; }
  const std::vector<double>& coefficients() const { return coef_; }
  const ConvergenceReport& report() const { return report_; }
  const std::vector<std::string>& predictors() const { return predictors_; }

  double linear_predictor(const std::map<std::string, double>& row) const {
    double eta = coef_[0];
    std::size_t j = 1;
    for (const auto& name : predictors_) {
      auto it = row.find(name);
      if (it == row.end()) fail(ErrorCode::missing_predictor, "row misses predictor " + name);
      int k = levels_.at(name);
      if (k == 0) {
        eta += coef_[j++] * it->second;
      } else {
        int level = static_cast<int>(it->second);
        if (it->second != level || level < 0 || level >= k)
          fail(ErrorCode::value_out_of_domain, "bad level for predictor " + name);
        for (int l = 1; l < k; ++l, ++j)
          if (level == l) eta += coef_[j];
      }
    }
    return eta;
  }

  double predict(const std::map<std::string, double>& row) const {
    double eta = linear_predictor(row);
    return logistic_ ? 1.0 / (1.0 + std::exp(-eta)) : eta;
  }

 private:
  friend FittedRegression fit_linear(const Dataset&, const std::string&,
                                     const std::vector<std::string>&, bool);
  friend FittedRegression fit_logistic(const Dataset&, const std::string&,
                                       const std::vector<std::string>&, bool);
  bool logistic_ = false;
  std::vector<std::string> predictors_;
  std::map<std::string, int> levels_;  // 0 for continuous, else level count
  std::vector<double> coef_;
  ConvergenceReport report_;
};

namespace detail {

inline Eigen::MatrixXd design_matrix(const Dataset& data,
                                     const std::vector<std::string>& predictors,
                                     std::map<std::string, int>& levels) {
  std::size_t cols = 1;
  for (const auto& name : predictors) {
    const ColumnType& t = data.type_of(name);
    levels[name] = t.categorical ? t.levels : 0;
    cols += t.categorical ? static_cast<std::size_t>(t.levels - 1) : 1;
  }
  Eigen::MatrixXd x(data.n(), cols);
  x.col(0).setOnes();
  std::size_t j = 1;
  for (const auto& name : predictors) {
    const auto& col = data.column(name);
    if (levels[name] == 0) {
      for (std::size_t r = 0; r < data.n(); ++r) x(r, j) = col[r];
      ++j;
    } else {
      for (int l = 1; l < levels[name]; ++l, ++j)
        for (std::size_t r = 0; r < data.n(); ++r)
          x(r, j) = static_cast<int>(col[r]) == l ? 1.0 : 0.0;
    }
  }
  return x;
}

constexpr double kRidgeEpsilon = 1e-8;
constexpr double kSeparationBound = 30.0;
constexpr int kMaxIrlsIterations = 100;
constexpr double kGradientTolerance = 1e-8;

}  // namespace detail

/** Ordinary least squares via rank-revealing QR; optional tiny ridge rescue
 * for near-singular designs (reported, never silent). */
inline FittedRegression fit_linear(const Dataset& data, const std::string& outcome,
                                   const std::vector<std::string>& predictors,
                                   bool ridge_rescue = false) {
  FittedRegression m;
  m.logistic_ = false;
  m.predictors_ = predictors;
  Eigen::MatrixXd x = detail::design_matrix(data, predictors, m.levels_);
  const auto& ycol = data.column(outcome);
  Eigen::VectorXd y(data.n());
  for (std::size_t r = 0; r < data.n(); ++r) y(r) = ycol[r];
  if (static_cast<std::ptrdiff_t>(data.n()) <= x.cols())
    fail(ErrorCode::insufficient_rows, "need more rows than coefficients");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::VectorXd beta;
  if (qr.rank() < x.cols()) {
    if (!ridge_rescue) fail(ErrorCode::rank_deficient, "design matrix is rank deficient");
    Eigen::MatrixXd xtx = x.transpose() * x;
    xtx.diagonal().array() += detail::kRidgeEpsilon;
    beta = xtx.ldlt().solve(x.transpose() * y);
    m.report_.ridge_applied = true;
  } else {
    beta = qr.solve(y);
  }
  m.report_.iterations = 1;
  m.report_.gradient_norm = (x.transpose() * (y - x * beta)).norm();
  m.coef_.assign(beta.data(), beta.data() + beta.size());
  return m;
}

/** Logistic regression by iteratively reweighted least squares. Declares
 * separation when any coefficient runs away past a fixed bound. */
inline FittedRegression fit_logistic(const Dataset& data, const std::string& outcome,
                                     const std::vector<std::string>& predictors,
                                     bool ridge_rescue = false) {
  const ColumnType& yt = data.type_of(outcome);
  if (!yt.categorical || yt.levels != 2)
    fail(ErrorCode::bad_argument, "logistic outcome must be binary categorical");
  FittedRegression m;
  m.logistic_ = true;
  m.predictors_ = predictors;
  Eigen::MatrixXd x = detail::design_matrix(data, predictors, m.levels_);
  const auto& ycol = data.column(outcome);
  Eigen::VectorXd y(data.n());
  for (std::size_t r = 0; r < data.n(); ++r) y(r) = ycol[r];
  if (static_cast<std::ptrdiff_t>(data.n()) <= x.cols())
    fail(ErrorCode::insufficient_rows, "need more rows than coefficients");
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < x.cols() && !ridge_rescue)
      fail(ErrorCode::rank_deficient, "design matrix is rank deficient");
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  double grad_norm = 0.0;
  int iter = 0;
  for (; iter < detail::kMaxIrlsIterations; ++iter) {
    Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd p = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    Eigen::VectorXd grad = x.transpose() * (y - p);
    grad_norm = grad.norm();
    if (grad_norm < detail::kGradientTolerance) break;
    Eigen::VectorXd w = (p.array() * (1.0 - p.array())).max(1e-10).matrix();
    Eigen::MatrixXd xtwx = x.transpose() * w.asDiagonal() * x;
    if (m.report_.ridge_applied || ridge_rescue)
      xtwx.diagonal().array() += detail::kRidgeEpsilon;
    Eigen::VectorXd delta = xtwx.ldlt().solve(grad);
    beta += delta;
    if (beta.cwiseAbs().maxCoeff() > detail::kSeparationBound)
      fail(ErrorCode::separation, "separation detected: coefficient diverged");
  }
  if (grad_norm >= detail::kGradientTolerance)
    fail(ErrorCode::no_convergence, "logistic fit did not converge");
  m.report_.iterations = iter;
  m.report_.gradient_norm = grad_norm;
  m.report_.ridge_applied = m.report_.ridge_applied || ridge_rescue;
  m.coef_.assign(beta.data(), beta.data() + beta.size());
  return m;
}

/**
 * Empirical conditional probability table with additive smoothing:
 * p(t|c) = (count(t,c) + alpha) / (count(c) + alpha*k). With alpha = 0,
 * never-seen strata fall back to uniform and are counted separately.
 */
class EmpiricalCPT {
 public:
  EmpiricalCPT() = default;

  const std::string& target() const { return target_; }
  int target_levels() const { return k_; }
  const std::vector<std::string>& given() const { return given_; }
  double alpha() const { return alpha_; }
  int unseen_strata() const { return unseen_; }
  std::size_t strata() const { return table_.size() / static_cast<std::size_t>(k_); }

  double prob(int target_level, const std::vector<int>& given_levels) const {
    if (target_level < 0 || target_level >= k_)
      fail(ErrorCode::value_out_of_domain, "target level out of range");
    return table_[stratum_of(given_levels) * static_cast<std::size_t>(k_) +
                  static_cast<std::size_t>(target_level)];
  }

  bool stratum_seen(const std::vector<int>& given_levels) const {
    return counts_[stratum_of(given_levels)] > 0;
  }

  std::size_t stratum_of(const std::vector<int>& given_levels) const {
    if (given_levels.size() != given_.size())
      fail(ErrorCode::dimension_mismatch, "conditioning levels arity mismatch");
    std::size_t s = 0;
    for (std::size_t i = 0; i < given_.size(); ++i) {
      if (given_levels[i] < 0 || given_levels[i] >= given_sizes_[i])
        fail(ErrorCode::value_out_of_domain, "conditioning level out of range for " + given_[i]);
      s = s * static_cast<std::size_t>(given_sizes_[i]) + static_cast<std::size_t>(given_levels[i]);
    }
    return s;
  }

 private:
  friend EmpiricalCPT fit_cpt(const Dataset&, const std::string&,
                              const std::vector<std::string>&, std::optional<double>);
  std::string target_;
  int k_ = 0;
  std::vector<std::string> given_;
  std::vector<int> given_sizes_;
  std::vector<double> table_;
  std::vector<std::size_t> counts_;  // per stratum
  double alpha_ = 0.0;
  int unseen_ = 0;
};

inline EmpiricalCPT fit_cpt(const Dataset& data, const std::string& target,
                            const std::vector<std::string>& given,
                            std::optional<double> alpha = std::nullopt) {
  EmpiricalCPT c;
  c.target_ = target;
  c.k_ = data.levels_of(target);  // throws on continuous
  c.given_ = given;
  c.alpha_ = alpha.value_or(given.empty() ? 0.0 : 0.5);
  std::size_t strata = 1;
  for (const auto& name : given) {
    c.given_sizes_.push_back(data.levels_of(name));
    strata *= static_cast<std::size_t>(c.given_sizes_.back());
  }
  std::vector<std::size_t> joint(strata * static_cast<std::size_t>(c.k_), 0);
  c.counts_.assign(strata, 0);
  for (std::size_t r = 0; r < data.n(); ++r) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < given.size(); ++i)
      s = s * static_cast<std::size_t>(c.given_sizes_[i]) +
          static_cast<std::size_t>(data.level_at(given[i], r));
    joint[s * static_cast<std::size_t>(c.k_) +
          static_cast<std::size_t>(data.level_at(target, r))]++;
    c.counts_[s]++;
  }
  c.table_.assign(joint.size(), 0.0);
  for (std::size_t s = 0; s < strata; ++s) {
    double denom = static_cast<double>(c.counts_[s]) + c.alpha_ * c.k_;
    if (denom == 0.0) {
      ++c.unseen_;
      for (int k = 0; k < c.k_; ++k)
        c.table_[s * static_cast<std::size_t>(c.k_) + static_cast<std::size_t>(k)] = 1.0 / c.k_;
    } else {
      for (int k = 0; k < c.k_; ++k)
        c.table_[s * static_cast<std::size_t>(c.k_) + static_cast<std::size_t>(k)] =
            (static_cast<double>(joint[s * static_cast<std::size_t>(c.k_) +
                                       static_cast<std::size_t>(k)]) +
             c.alpha_) /
            denom;
    }
  }
  return c;
}

}  // namespace causal
