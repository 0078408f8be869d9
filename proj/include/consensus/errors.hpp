#pragma once

#include <stdexcept>
#include <string>

namespace consensus {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A constructed value violates one of its documented invariants.
struct InvariantViolation : Error {
  using Error::Error;
};

/// An operation requiring strong connectivity was given a graph without it.
struct NotStronglyConnected : Error {
  using Error::Error;
};

/// The numerical null space of the transposed Laplacian is not one-dimensional.
struct DegenerateNullspace : Error {
  using Error::Error;
};

/// A computed left eigenvector has an entry at or below the tolerance.
struct NonPositiveEntry : Error {
  using Error::Error;
};

/// Sampled difference quotients of a protocol are not strictly positive.
struct NonMonotone : Error {
  using Error::Error;
};

/// An integration step produced a non-finite state component.
struct NonFiniteState : Error {
  using Error::Error;
};

/// Neither trajectory reaches the requested disagreement threshold.
struct Incomparable : Error {
  using Error::Error;
};

/// Malformed input text. Carries a 1-based line and column when known.
struct ParseError : Error {
  ParseError(const std::string& what, long line_no = 0, long column_no = 0)
      : Error(what), line(line_no), column(column_no) {}
  long line;
  long column;
};

/// Inconsistent or incomplete run configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace consensus
