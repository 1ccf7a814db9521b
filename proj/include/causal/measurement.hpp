#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "causal/dataset.hpp"
#include "causal/error.hpp"
#include "causal/estimate.hpp"
#include "causal/prob_table.hpp"

namespace causal {

inline constexpr double kSingularValueFloor = 1e-8;
inline constexpr double kConditionLimit = 1e8;
inline constexpr double kClipWarnThreshold = 0.01;

/**
 * Column-stochastic proxy model: column c holds the distribution of the
 * observed proxy given true class c. Must have at least as many proxy levels
 * as true levels and full column rank, checked at construction.
 */
class MisclassificationMatrix {
 public:
  static MisclassificationMatrix build(int proxy_levels, int true_levels,
                                       const std::vector<std::vector<double>>& columns) {
    if (proxy_levels < 1 || true_levels < 1)
      fail(ErrorCode::dimension_mismatch, "level counts must be positive");
    if (proxy_levels < true_levels)
      fail(ErrorCode::dimension_mismatch,
           "fewer proxy levels than true levels: matrix cannot be inverted");
    if (columns.size() != static_cast<std::size_t>(true_levels))
      fail(ErrorCode::dimension_mismatch, "expected one column per true level");
    Eigen::MatrixXd m(proxy_levels, true_levels);
    for (int c = 0; c < true_levels; ++c) {
      const auto& col = columns[static_cast<std::size_t>(c)];
      if (col.size() != static_cast<std::size_t>(proxy_levels))
        fail(ErrorCode::dimension_mismatch, "column length must equal the proxy level count");
      double sum = 0.0;
      for (int r = 0; r < proxy_levels; ++r) {
        double p = col[static_cast<std::size_t>(r)];
        if (p < 0.0) fail(ErrorCode::invalid_cpt, "negative entry in misclassification matrix");
        m(r, c) = p;
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        fail(ErrorCode::invalid_cpt, "misclassification column does not sum to 1");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(true_levels - 1);
    if (smin <= kSingularValueFloor)
      fail(ErrorCode::singular_matrix, "misclassification matrix is rank deficient");
    if (smax / smin > kConditionLimit)
      fail(ErrorCode::singular_matrix, "misclassification matrix is too ill-conditioned");
    MisclassificationMatrix out;
    out.m_ = std::move(m);
    out.condition_ = smax / smin;
    if (proxy_levels == true_levels) {
      out.left_inverse_ = out.m_.inverse();
    } else {
      out.left_inverse_ = out.m_.completeOrthogonalDecomposition().pseudoInverse();
    }
    return out;
  }

  int proxy_levels() const { return static_cast<int>(m_.rows()); }
  int true_levels() const { return static_cast<int>(m_.cols()); }
  double condition() const { return condition_; }
  const Eigen::MatrixXd& matrix() const { return m_; }
  /** L with L * matrix() == identity over the true levels. */
  const Eigen::MatrixXd& left_inverse() const { return left_inverse_; }

  /** Distribution of the proxy induced by a distribution over true levels. */
  std::vector<double> forward(const std::vector<double>& truth) const {
    if (truth.size() != static_cast<std::size_t>(true_levels()))
      fail(ErrorCode::dimension_mismatch, "vector length must equal the true level count");
    Eigen::VectorXd v(true_levels());
    for (int i = 0; i < true_levels(); ++i) v(i) = truth[static_cast<std::size_t>(i)];
    Eigen::VectorXd u = m_ * v;
    return std::vector<double>(u.data(), u.data() + u.size());
  }

 private:
  Eigen::MatrixXd m_;
  Eigen::MatrixXd left_inverse_;
  double condition_ = 0.0;
};

struct ClipReport {
  double clipped_mass = 0.0;   // total negative mass zeroed out
  double renorm_factor = 1.0;  // divisor restoring unit mass after clipping
  bool warn = false;           // clipped mass large enough to doubt the matrix
};

struct CorrectedTable {
  ProbTable table;
  ClipReport clip;
};

/**
 * Replace the proxy axis of a joint table by the inferred true-class axis:
 * apply the left inverse along that axis, zero any negative cells, and
 * renormalize. Reports how much mass the clipping discarded.
 */
inline CorrectedTable corrected_joint(const ProbTable& joint, const std::string& proxy,
                                      const std::string& corrected_name,
                                      const MisclassificationMatrix& mis) {
  std::size_t axis = joint.axis_of(proxy);
  if (joint.size_of(proxy) != mis.proxy_levels())
    fail(ErrorCode::dimension_mismatch, "proxy axis size differs from the matrix row count");
  for (const auto& name : joint.names())
    if (name != proxy && name == corrected_name)
      fail(ErrorCode::duplicate_name, "corrected name collides with another axis");
  std::vector<std::string> vars = joint.names();
  vars[axis] = corrected_name;
  std::vector<int> sizes = joint.sizes();
  sizes[axis] = mis.true_levels();
  std::size_t cells = 1;
  for (int s : sizes) cells *= static_cast<std::size_t>(s);
  std::vector<double> probs(cells, 0.0);
  ProbTable shape = ProbTable::raw(vars, sizes, std::move(probs));
  const Eigen::MatrixXd& inv = mis.left_inverse();
  ClipReport clip;
  double total = 0.0;
  for (std::size_t flat = 0; flat < shape.cells(); ++flat) {
    std::vector<int> levels = shape.decode(flat);
    int truth = levels[axis];
    double value = 0.0;
    for (int r = 0; r < mis.proxy_levels(); ++r) {
      levels[axis] = r;
      value += inv(truth, r) * joint.cell(joint.encode(levels));
    }
    if (value < 0.0) {
      clip.clipped_mass += -value;
      value = 0.0;
    }
    shape.cell(flat) = value;
    total += value;
  }
  if (total <= 0.0) fail(ErrorCode::invalid_cpt, "corrected table has no mass");
  shape.scale(1.0 / total);
  clip.renorm_factor = total;
  clip.warn = clip.clipped_mass > kClipWarnThreshold;
  return {std::move(shape), clip};
}

/** Empirical joint frequency table over categorical columns of a dataset. */
inline ProbTable empirical_joint(const Dataset& data, const std::vector<std::string>& vars) {
  std::vector<int> sizes;
  for (const auto& v : vars) {
    if (!data.is_categorical(v))
      fail(ErrorCode::continuous_variable, "joint table needs categorical columns: " + v);
    sizes.push_back(data.levels_of(v));
  }
  std::size_t cells = 1;
  for (int s : sizes) cells *= static_cast<std::size_t>(s);
  std::vector<double> probs(cells, 0.0);
  ProbTable t = ProbTable::raw(vars, sizes, std::move(probs));
  std::vector<int> levels(vars.size());
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < vars.size(); ++j) levels[j] = data.level_at(vars[j], i);
    t.cell(t.encode(levels)) += 1.0;
  }
  t.scale(1.0 / static_cast<double>(data.n()));
  return t;
}

struct CorrectedEffect {
  double point = 0.0;
  ClipReport clip;
};

/**
 * Adjusted mean under the treatment level computed on the corrected joint:
 * reconstruct the true-confounder distribution first, then adjust for it
 * (plus any extra covariates measured without error).
 */
inline CorrectedEffect corrected_effect(const Dataset& data, const std::string& treat, int a,
                                        const std::string& y, const std::string& proxy,
                                        const std::string& corrected_name,
                                        const std::vector<std::string>& extra_adjust,
                                        const MisclassificationMatrix& mis) {
  detail::require_level(data, treat, a);
  std::vector<std::string> vars{treat, proxy};
  for (const auto& v : extra_adjust) vars.push_back(v);
  vars.push_back(y);
  ProbTable joint = empirical_joint(data, vars);
  CorrectedTable corrected = corrected_joint(joint, proxy, corrected_name, mis);
  std::vector<std::string> w{corrected_name};
  for (const auto& v : extra_adjust) w.push_back(v);
  CorrectedEffect out;
  out.clip = corrected.clip;
  out.point = gformula_functional(corrected.table, treat, a, y, w);
  return out;
}

}  // namespace causal
