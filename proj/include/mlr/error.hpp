#pragma once

#include <stdexcept>
#include <string>

namespace mlr {

// Error families. The CLI maps each family onto a distinct exit code.

/// Incompatible tensor dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// API misuse: backward without a forward cache, eval-mode batchnorm without
/// running statistics, mismatched argmax maps.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values in losses, gradients or parameters.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent data: dataset manifests, blobs, weight files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// A container whose tensor count disagrees with its header or its consumer.
class TensorCountError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Invalid run configuration or command-line arguments.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failures (missing files, unwritable outputs).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training data that cannot support the requested model (e.g. single-class
/// labels for a logistic regression task).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Metrics over empty or mismatched prediction/label vectors.
class EvaluationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mlr
