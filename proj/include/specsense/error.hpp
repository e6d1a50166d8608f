#pragma once

#include <stdexcept>

namespace specsense {

/// Invalid or inconsistent configuration (scenario files, quotas, flags).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a model formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An assignment that violates the row/column sum constraints.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The exact solver refuses instances above its size cap.
class SolverLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace specsense
