#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace gaplm {

// Stable error codes. The C API and the CLI's error JSON expose the same
// enumerators by name, so values and names must stay fixed once released.
enum class ErrorCode : int {
  ok = 0,
  param_domain = 1,         // argument outside its documented domain
  numeric_domain = 2,       // evaluation point / input outside [0,1] or non-finite
  degenerate_design = 3,    // no data support where the basis needs it
  degenerate_variance = 4,  // marginal variance collapses to zero
  saturation = 5,           // fitted bernoulli mean hit 0/1
  ill_conditioned = 6,      // per-cluster covariance factorization failed
  singular_information = 7, // rank-deficient model information matrix
  not_identifiable = 8,     // correlation parameter not estimable
  infeasible_correlation = 9, // binary correlation outside Frechet bounds
  non_convergence = 10,
  selection_failed = 11,    // every knot candidate failed
  band_degree = 12,         // simultaneous band requires linear splines
  io_error = 13,
  parse_error = 14,
  config_error = 15,
  internal = 16,
};

const char* error_code_name(ErrorCode code);

// Exception carrying a stable code plus free-form key/value context
// (cluster index, row, file position, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message,
        std::map<std::string, std::string> context = {})
      : std::runtime_error(std::move(message)),
        code_(code),
        context_(std::move(context)) {}

  ErrorCode code() const { return code_; }
  const std::map<std::string, std::string>& context() const { return context_; }

 private:
  ErrorCode code_;
  std::map<std::string, std::string> context_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::param_domain: return "param_domain";
    case ErrorCode::numeric_domain: return "numeric_domain";
    case ErrorCode::degenerate_design: return "degenerate_design";
    case ErrorCode::degenerate_variance: return "degenerate_variance";
    case ErrorCode::saturation: return "saturation";
    case ErrorCode::ill_conditioned: return "ill_conditioned";
    case ErrorCode::singular_information: return "singular_information";
    case ErrorCode::not_identifiable: return "not_identifiable";
    case ErrorCode::infeasible_correlation: return "infeasible_correlation";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::selection_failed: return "selection_failed";
    case ErrorCode::band_degree: return "band_degree";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

}  // namespace gaplm
