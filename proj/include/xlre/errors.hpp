#pragma once

#include <stdexcept>
#include <string>

namespace xlre {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (negative retention,
/// reserve outside the range of G, theta outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The operation is undefined at this input (e.g. a ratio with a vanishing
/// denominator).
class SingularInputError : public Error {
 public:
  using Error::Error;
};

/// The model violates a structural requirement, such as a non-positive
/// denominator in the integrand of G.
class ModelInconsistencyError : public Error {
 public:
  using Error::Error;
};

/// A root bracket did not change sign; the caller routed the problem to the
/// wrong case.
class CaseClassificationError : public Error {
 public:
  using Error::Error;
};

/// A shooting or fixed-point search found no bracket, or its map was not
/// monotone.
class CaseInconsistencyError : public Error {
 public:
  using Error::Error;
};

/// The input cannot be brought into the normalized form (a <= 1/2 together
/// with M2/M1 >= kappa2/kappa1) or hits a regime the closed form does not
/// cover.
class UnsupportedConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an API precondition (for instance an injection trigger that
/// does not match the state).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed problem or policy document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state encountered while simulating a path.
class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace xlre
