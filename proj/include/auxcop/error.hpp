#pragma once

#include <stdexcept>
#include <string>

namespace auxcop {

enum class Errc {
  missing_bounds,
  non_monotone,
  too_few,
  out_of_support,
  degenerate_cdf,
  singular_submatrix,
  empty_interval,
  non_monotone_knots,
  insufficient_draws,
  rank_deficient,
  non_convergence,
  boundary_estimate,
  contract_violation,
  config_error,
  io_error,
};

const char* to_string(Errc code) noexcept;

// Every failure the library reports carries one of the codes above so callers
// (and tests) can branch on the kind rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace auxcop
