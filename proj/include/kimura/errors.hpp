#pragma once

#include <stdexcept>
#include <string>

namespace kimura {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands with incompatible (n, m) or vector lengths.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted is numerically singular.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Parameters that make a formula or a model assumption infeasible.
class InfeasibleParameterError : public Error {
 public:
  using Error::Error;
};

/// Invalid input to an operation (empty sample sets, malformed bundles, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// An estimator cannot produce a value (e.g. every path was excluded).
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// A failure while simulating, carrying path and step context.
class SimulationError : public Error {
 public:
  SimulationError(const std::string& what, long long path, long long step)
      : Error(what + " (path " + std::to_string(path) + ", step " + std::to_string(step) + ")"),
        path_(path),
        step_(step) {}

  long long path() const { return path_; }
  long long step() const { return step_; }

 private:
  long long path_;
  long long step_;
};

/// Configuration parse or validation failure.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kimura
