#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slmc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Input value violates the invariants of its type.
class InvalidInput : public Error
{
public:
  using Error::Error;
};

/// An operation produced a result whose invariants drifted beyond rounding noise.
class InvariantViolation : public Error
{
public:
  using Error::Error;
};

/// Opinion with zero uncertainty has no finite evidence representation.
class DogmaticOpinion : public Error
{
public:
  using Error::Error;
};

/// Cumulative fusion operand outside 0 < u < 1.
class FusionDomainError : public Error
{
public:
  using Error::Error;
};

/// Scalar parameter out of range (discount, Dirichlet alpha, ...).
class ParameterError : public Error
{
public:
  using Error::Error;
};

/// Operands defined over domains of different cardinality.
class DomainMismatch : public Error
{
public:
  using Error::Error;
};

/// Invalid identifier, scenario or pipeline configuration.
class ConfigError : public Error
{
public:
  using Error::Error;
};

/// Observation outside the state space.
class ObservationError : public Error
{
public:
  ObservationError(const std::string& what, std::size_t window_index)
    : Error{what + " (window " + std::to_string(window_index) + ")"}
    , window_index_{window_index}
  {}

  std::size_t window_index() const noexcept { return window_index_; }

private:
  std::size_t window_index_;
};

/// Malformed trace data; `line` is 1-based, 0 when not tied to a file line.
class TraceError : public Error
{
public:
  TraceError(const std::string& what, std::size_t line = 0)
    : Error{line == 0 ? what : "line " + std::to_string(line) + ": " + what}
    , line_{line}
  {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// File could not be opened, read or written.
class IoError : public Error
{
public:
  using Error::Error;
};

} // namespace slmc
