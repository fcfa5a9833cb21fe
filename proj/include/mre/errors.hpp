#pragma once

#include <stdexcept>
#include <string>

namespace mre {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform to the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A value lies outside the domain of a function (log of non-positive, zero-norm, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A caller-side precondition was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared during evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that is inconsistent (e.g. feature widths differ between samples).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace mre
