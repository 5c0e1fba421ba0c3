#pragma once

#include <stdexcept>
#include <string>

namespace gblobs {

/// Base class for all gblobs errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File could not be opened/read/written.
struct IoError : Error {
  using Error::Error;
};

/// File exists but violates its format contract (bad length, arity, non-finite values...).
struct MalformedFile : Error {
  using Error::Error;
};

/// Caller passed an argument outside the documented domain.
struct InvalidArgument : Error {
  using Error::Error;
};

/// Rotation matrix is not orthonormal with determinant +1.
struct InvalidTransform : Error {
  using Error::Error;
};

/// A descriptor was requested for an empty point set.
struct EmptyNeighborhood : Error {
  using Error::Error;
};

/// Scene generation could not satisfy its constraints (placement retries exhausted).
struct GenerationFailure : Error {
  using Error::Error;
};

/// Classifier training diverged (non-finite loss).
struct TrainingFailure : Error {
  using Error::Error;
};

}  // namespace gblobs
