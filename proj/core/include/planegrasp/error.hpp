#pragma once

#include <stdexcept>
#include <string>

namespace planegrasp {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Homogeneous projection with a vanishing third coordinate.
class PointAtInfinity : public Error {
 public:
  using Error::Error;
};

/// Point configuration that does not determine a model (collinear,
/// rank-deficient design matrix, singular result).
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

/// RANSAC could not find a consensus set large enough to accept.
class NoConsensus : public Error {
 public:
  using Error::Error;
};

/// No valid depth at or around a queried pixel.
class NoDepth : public Error {
 public:
  using Error::Error;
};

/// Plane basis vectors too short or too close to parallel.
class DegeneratePlane : public Error {
 public:
  using Error::Error;
};

/// Pose whose orientation could not be decomposed without ambiguity.
class DegeneratePose : public Error {
 public:
  using Error::Error;
};

/// Synthetic object seen from behind.
class BackFacing : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (file contents, matrices, parameters).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace planegrasp
