#pragma once

#include <stdexcept>
#include <string>

namespace geoflow {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input files or un-parseable arguments (CLI exit code 2).
struct ParseError : Error {
  using Error::Error;
};

/// Violated domain invariants: wrong dimensions, non-self-adjoint input,
/// non-PSD operators, trace off the hyperplane (CLI exit code 3).
struct InvariantError : Error {
  using Error::Error;
};

/// Numerical failures at runtime: blow-ups, step-count exhaustion,
/// non-finite states, ambiguous spectra (CLI exit code 4).
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace geoflow
