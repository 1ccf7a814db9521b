#pragma once

#include <stdexcept>
#include <string>

namespace causal {

enum class ErrorCode {
  // graph construction / lookup
  duplicate_name,
  dangling_edge,
  self_loop,
  cycle_detected,
  unknown_variable,
  overlapping_sets,
  intervening_on_unobserved,
  unobserved_variable,
  // identification
  unobserved_in_adjustment,
  order_violation,
  sequential_ignorability,
  // data / models
  schema_mismatch,
  missing_value,
  value_out_of_domain,
  continuous_variable,
  missing_predictor,
  insufficient_rows,
  rank_deficient,
  separation,
  no_convergence,
  // estimation
  positivity,
  estimator_failed_on_resample,
  bad_argument,
  // measurement
  singular_matrix,
  dimension_mismatch,
  // scm
  invalid_cpt,
  state_space_too_large,
  // discovery
  unsupported_graph,
  // io
  parse_error,
};

/** Exception carrying a machine-readable code alongside the message. */
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::duplicate_name: return "duplicate_name";
    case ErrorCode::dangling_edge: return "dangling_edge";
    case ErrorCode::self_loop: return "self_loop";
    case ErrorCode::cycle_detected: return "cycle_detected";
    case ErrorCode::unknown_variable: return "unknown_variable";
    case ErrorCode::overlapping_sets: return "overlapping_sets";
    case ErrorCode::intervening_on_unobserved: return "intervening_on_unobserved";
    case ErrorCode::unobserved_variable: return "unobserved_variable";
    case ErrorCode::unobserved_in_adjustment: return "unobserved_in_adjustment";
    case ErrorCode::order_violation: return "order_violation";
    case ErrorCode::sequential_ignorability: return "sequential_ignorability";
    case ErrorCode::schema_mismatch: return "schema_mismatch";
    case ErrorCode::missing_value: return "missing_value";
    case ErrorCode::value_out_of_domain: return "value_out_of_domain";
    case ErrorCode::continuous_variable: return "continuous_variable";
    case ErrorCode::missing_predictor: return "missing_predictor";
    case ErrorCode::insufficient_rows: return "insufficient_rows";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::separation: return "separation";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::positivity: return "positivity";
    case ErrorCode::estimator_failed_on_resample: return "estimator_failed_on_resample";
    case ErrorCode::bad_argument: return "bad_argument";
    case ErrorCode::singular_matrix: return "singular_matrix";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::invalid_cpt: return "invalid_cpt";
    case ErrorCode::state_space_too_large: return "state_space_too_large";
    case ErrorCode::unsupported_graph: return "unsupported_graph";
    case ErrorCode::parse_error: return "parse_error";
  }
  return "unknown";
}

}  // namespace causal
