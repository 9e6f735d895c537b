#pragma once

#include <stdexcept>
#include <string>

namespace robustgame {

/// Argument outside the domain of a function (t outside [0, T], x <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical breakdown, e.g. a singular volatility matrix at some time.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model (or derived object) failed its invariants.
class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Monte Carlo work (paths * steps) larger than the configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace robustgame
