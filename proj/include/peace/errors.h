#pragma once

#include <stdexcept>
#include <string>

namespace peace {

/// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structured-text input did not match the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical precondition failed (zero vector, NaN logit, dimension mismatch).
class ComputationError : public Error {
 public:
  using Error::Error;
};

/// Model loading or inference failure.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed user-supplied file.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an API contract.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace peace
