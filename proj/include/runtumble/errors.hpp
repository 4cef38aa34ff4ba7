#ifndef RUNTUMBLE_ERRORS_HPP
#define RUNTUMBLE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rtp {

/// Invalid model parameters or arguments (negative rates, dimension
/// mismatches, models outside an operation's domain).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Velocity flip rates do not form a strongly connected chain.
struct IrreducibilityError : ParameterError {
  using ParameterError::ParameterError;
};

/// Argument outside the analytic domain of a transform (e.g. Re z <= 0).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A solver failed to converge or an internal consistency check tripped.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rtp

#endif
