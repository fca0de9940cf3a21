#pragma once

#include <stdexcept>
#include <string>

namespace pcts {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid model specification (non-causal AR, bad lifetime pmf, ...).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cholesky factorization hit a non-positive pivot.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, long pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  long pivot() const { return pivot_; }

 private:
  long pivot_;
};

/// Truncation interval carries no probability mass.
class DegenerateIntervalError : public std::runtime_error {
 public:
  DegenerateIntervalError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_, hi_;
};

/// Malformed input data (CSV rows, missing columns).
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pcts
