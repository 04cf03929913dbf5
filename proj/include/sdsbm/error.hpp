#pragma once

#include <stdexcept>
#include <string>

namespace sdsbm {

/// Bad input: out-of-range parameters, broken invariants, malformed files.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure in a network or fit document. Carries location context in the message.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A filter, smoother or optimizer step could not produce a finite answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace detail
}  // namespace sdsbm
