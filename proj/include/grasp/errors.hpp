#pragma once

// Exception hierarchy shared by all grasp components. Every error carries a
// human-readable message; callers that need to distinguish kinds catch the
// concrete type.

#include <stdexcept>
#include <string>

namespace grasp {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad parameter or precondition violation detected at a public boundary.
struct InvalidArgumentError : Error {
  using Error::Error;
};

// Rejection-sampling loop gave up after too many consecutive duplicates.
struct ExhaustionError : Error {
  using Error::Error;
};

// A spatial dimension would drop below 1 during shape propagation.
struct ShapeUnderflowError : Error {
  using Error::Error;
};

// A shape component exceeds the configured normalization maximum.
struct NormalizerError : Error {
  using Error::Error;
};

// Graph does not fit the fixed encoder dimensions.
struct CapacityError : Error {
  using Error::Error;
};

// Requested record/file does not exist.
struct NotFoundError : Error {
  using Error::Error;
};

// Stored data conflicts with data being written or re-written.
struct IntegrityError : Error {
  using Error::Error;
};

// Filesystem or serialization failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace grasp
