#pragma once

#include <stdexcept>
#include <string>

namespace oog {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- input / format errors ---

class ParseError : public Error {
 public:
  using Error::Error;
};

/// A structurally valid file violated an invariant. `path()` names the
/// offending element, e.g. "keypoint_tracks[2].positions".
class SchemaError : public Error {
 public:
  SchemaError(const std::string& message, std::string path)
      : Error(message + " (at " + path + ")"), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

// --- geometry ---

class TooFewPoints : public Error {
 public:
  using Error::Error;
};

class DegenerateCloud : public Error {
 public:
  using Error::Error;
};

// --- plan generation ---

class SeriesTooShort : public Error {
 public:
  using Error::Error;
};

class NoVisibleKeypoints : public Error {
 public:
  using Error::Error;
};

class NoMotion : public Error {
 public:
  using Error::Error;
};

// --- registration ---

class RegistrationFailed : public Error {
 public:
  RegistrationFailed(const std::string& message, double fitness)
      : Error(message), fitness_(fitness) {}
  double fitness() const { return fitness_; }

 private:
  double fitness_ = 0.0;
};

// --- trajectory warping ---

class DegenerateTrajectory : public Error {
 public:
  using Error::Error;
};

// --- optimization ---

class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

// --- simulation ---

class PlacementFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace oog
