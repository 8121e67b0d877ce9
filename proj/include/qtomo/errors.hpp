#pragma once

#include <stdexcept>
#include <string>

namespace qtomo {

// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Operands live on Hilbert spaces of different dimension.
class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& message) : Error(message) {}
};

// A numeric precondition does not hold: truncation regime violated,
// rank-deficient spanning set, non-Hermitian generator, empty sample set...
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message) : Error(message) {}
};

// Malformed input file (JSON or CSV).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error(message) {}
};

// A file cannot be opened, read or written.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(message) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace qtomo
