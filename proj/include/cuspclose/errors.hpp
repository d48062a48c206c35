#pragma once

#include <stdexcept>
#include <string>

namespace cuspclose {

// Caller passed arguments that violate an operation's contract.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A point of the upper half-space model with non-positive height.
class InvalidPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Evaluation outside the domain of a profile or chart.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A geometric precondition (collar constraint, plan invariant) failed.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The threshold order exceeds the requested cap range.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cuspclose
