#pragma once

#include <stdexcept>
#include <string>

namespace cftqei {

/// Rejected input: bad parameters, malformed files, violated preconditions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not reach its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scientific contract (positivity, monotone convergence, ...) failed.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cftqei
