#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mass vector is not a valid probability measure (negative entries,
/// zero total, or not normalized where normalization is required).
class InvalidMeasure : public Error {
 public:
  using Error::Error;
};

/// Two fields that must share a lattice do not.
class IncompatibleFields : public Error {
 public:
  using Error::Error;
};

/// Solver or grid configuration is out of range.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Iterates became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : Error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// A density cannot be represented with the requested common denominator.
class RationalityError : public Error {
 public:
  using Error::Error;
};

/// Malformed density file or other text input.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace emd
