#pragma once

#include <stdexcept>
#include <string>

namespace agim {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed formula text. Carries the 1-based line/column of the offending token.
struct SyntaxError : Error {
  int line;
  int col;
  SyntaxError(const std::string& msg, int line_, int col_)
      : Error(msg + " (line " + std::to_string(line_) + ", col " + std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

/// Temporal interval with a > b, negative bounds, or a == b where a proper window is required.
struct IntervalError : Error {
  using Error::Error;
};

/// Query outside the time span covered by a trace, signal, or control sequence.
struct OutOfDomain : Error {
  using Error::Error;
};

/// Raw trace value outside its declared normalization bounds.
struct OutOfBounds : Error {
  using Error::Error;
};

/// Operator that parses but has no quantitative semantics here (Until).
struct UnsupportedOperator : Error {
  using Error::Error;
};

/// AGIM evaluation on a trace that is not flagged as normalized.
struct NotNormalized : Error {
  using Error::Error;
};

/// Geometric-mean integrand left its legal domain; indicates a branch-selection bug.
struct BranchViolation : Error {
  using Error::Error;
};

/// Simulation produced a non-finite state.
struct NonFinite : Error {
  using Error::Error;
};

/// Integration step does not divide the control sample period (or the horizon).
struct Misaligned : Error {
  using Error::Error;
};

/// Missing or ill-typed entry in a JSON model configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace agim
