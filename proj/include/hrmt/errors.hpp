#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hrmt {

/// Thrown when an operation is called outside its domain (bad index, bad
/// parameter range). Maps to CLI exit code 2 when raised during validation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical backend fails to converge or an exact-identity
/// check breaks down. Carries the seed of the offending realization so the
/// failure can be reproduced. Maps to CLI exit code 3.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& msg, std::uint64_t seed)
      : std::runtime_error(msg + " (seed " + std::to_string(seed) + ")"),
        seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Thrown when an estimator is fed too few samples or a quadrature grid is
/// too coarse for the requested resolution.
class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-format or filesystem failure. Maps to CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hrmt
