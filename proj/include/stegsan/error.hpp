#pragma once

#include <stdexcept>
#include <string>

namespace stegsan {

/// Caller passed arguments that violate an operation's contract
/// (shape mismatch, bad flag, unknown dataset name).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dataset file is missing or malformed. The message names the file.
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model used before it was trained or loaded.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Optimisation diverged (non-finite loss).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorruptCheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs for which a formula is undefined (e.g. a zero denominator).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace stegsan
