#pragma once

#include <stdexcept>
#include <string>

namespace posenc {

enum class errc {
  invalid_argument,    // bad parameters or configuration
  ragged_rows,         // rows of unequal length in a corpus or matrix file
  parse_failure,       // malformed token, number, or header
  empty_input,         // no usable rows
  non_finite,          // NaN or infinity where finite values are required
  dimension_mismatch,  // incompatible shapes between inputs
  degenerate_position, // a position with no mass after exclusions
  degenerate_metric,   // all pairwise distances zero
  all_degenerate,      // every pair degenerate, no ratio defined
  zero_variance,       // correlation undefined
  no_convergence,      // iterative solver exhausted its budget
  not_positive_definite,
  singular_system,
  step_too_large,      // explicit integrator stability limit exceeded
  verification_failure // an internal consistency check that must hold failed
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_argument: return "invalid_argument";
    case errc::ragged_rows: return "ragged_rows";
    case errc::parse_failure: return "parse_failure";
    case errc::empty_input: return "empty_input";
    case errc::non_finite: return "non_finite";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::degenerate_position: return "degenerate_position";
    case errc::degenerate_metric: return "degenerate_metric";
    case errc::all_degenerate: return "all_degenerate";
    case errc::zero_variance: return "zero_variance";
    case errc::no_convergence: return "no_convergence";
    case errc::not_positive_definite: return "not_positive_definite";
    case errc::singular_system: return "singular_system";
    case errc::step_too_large: return "step_too_large";
    case errc::verification_failure: return "verification_failure";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

  // Exit-code contract: 2 usage/config, 3 data, 4 numeric.
  int exit_code() const noexcept {
    switch (code_) {
      case errc::invalid_argument:
        return 2;
      case errc::ragged_rows:
      case errc::parse_failure:
      case errc::empty_input:
      case errc::non_finite:
      case errc::dimension_mismatch:
      case errc::degenerate_position:
        return 3;
      default:
        return 4;
    }
  }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

} // namespace posenc
