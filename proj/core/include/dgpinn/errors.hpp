#pragma once

#include <stdexcept>

namespace dgpinn {

/// Violated precondition on data passed to a library call (shapes, missing
/// derivative entries, unsupported orders, off-manifold points).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// API misuse, e.g. reading gradients before a backward sweep.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A recorded value overflowed or became NaN.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration (CLI flags, config files, counts).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimization diverged or produced non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dgpinn
