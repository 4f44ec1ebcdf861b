#ifndef REINOPT_ERRORS_HPP
#define REINOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace reinopt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exponential-weighted claim moment does not exist for the requested tilt.
struct DivergentMoment : Error {
    using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance within budget.
struct QuadratureFailure : Error {
    using Error::Error;
};

/// A simulated state became NaN or infinite.
struct NonFiniteState : Error {
    using Error::Error;
};

/// A thinning proposal saw an intensity above the cell majorant.
struct MajorantBreach : Error {
    using Error::Error;
};

/// The concavity condition required by the retention optimizer failed.
struct ConcavityViolated : Error {
    using Error::Error;
};

/// The first-order condition had no sign change on [0,1].
struct RootBracketFailure : Error {
    using Error::Error;
};

/// Sampled volatility fell below the usable floor.
struct DegenerateVolatility : Error {
    using Error::Error;
};

/// A Monte Carlo check could not reach the required precision.
struct InsufficientReplications : Error {
    using Error::Error;
};

/// Scenario configuration failed schema or invariant checks.
struct ConfigInvalid : Error {
    using Error::Error;
};

/// A closed form was requested outside its parameter guard.
struct GuardViolated : Error {
    using Error::Error;
};

} // namespace reinopt

#endif
