#include "auxcop/error.hpp"

namespace auxcop {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::missing_bounds: return "MissingBounds";
    case Errc::non_monotone: return "NonMonotone";
    case Errc::too_few: return "TooFew";
    case Errc::out_of_support: return "OutOfSupport";
    case Errc::degenerate_cdf: return "DegenerateCDF";
    case Errc::singular_submatrix: return "SingularSubmatrix";
    case Errc::empty_interval: return "EmptyInterval";
    case Errc::non_monotone_knots: return "NonMonotoneKnots";
    case Errc::insufficient_draws: return "InsufficientDraws";
    case Errc::rank_deficient: return "RankDeficient";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::boundary_estimate: return "BoundaryEstimate";
    case Errc::contract_violation: return "ContractViolation";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IOError";
  }
  return "Unknown";
}

}  // namespace auxcop
