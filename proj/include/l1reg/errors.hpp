#pragma once

#include <stdexcept>
#include <string>

namespace l1reg {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or type invariant was violated by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  DimensionMismatch(const std::string& what, std::size_t expected, std::size_t got)
      : InvalidArgument(what + ": expected dimension " + std::to_string(expected) + ", got " +
                        std::to_string(got)) {}
};

/// An iterative method ran out of iterations.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// The sequential discrepancy principle found no grid point below tau * delta.
class DiscrepancyUnreachable : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace l1reg
