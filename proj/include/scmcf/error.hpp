#pragma once

#include <stdexcept>
#include <string>

namespace scmcf {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside a function's documented domain (e.g. c outside valid_range, R <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// PowerLaw exponent s == 1 makes 1/(1-s) undefined.
class InvalidExponent : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// g <= 0 or G'' <= 0 where the flow needs them positive.
class ParabolicityError : public Error {
 public:
  using Error::Error;
};

/// Degenerate segment, too few nodes, non-unit normal.
class MeshQualityError : public Error {
 public:
  using Error::Error;
};

/// Profile radius w <= 0 at an interior node (pinch-off).
class DegeneracyError : public MeshQualityError {
 public:
  using MeshQualityError::MeshQualityError;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Time step above the IMEX stability bound dt <= C * h_min.
class StabilityError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Self-intersection scenario: the offset curve is not embedded.
class EpsilonTooLarge : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace scmcf
