#pragma once

#include <stdexcept>
#include <string>

namespace motionkit {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes: DataError -> 2, NumericalError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input (files, shapes, invariant violations).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

// Geometric input that admits no well-defined result (coplanar clouds etc.).
class DegenerateInputError : public DataError {
 public:
  using DataError::DataError;
};

// Optimizers and solvers hitting NaN/Inf.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace motionkit
