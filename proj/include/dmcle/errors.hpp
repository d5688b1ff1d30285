#pragma once

#include <stdexcept>
#include <string>

namespace dmcle {

// Base of every error thrown by the library. Non-convergence is not an
// error: fits report it through FitResult::converged.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: non-normalized weights, non-finite values, bad shapes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Requested divergence is not attainable for the given sub-likelihood values.
class InfeasibleDivergenceError : public Error {
 public:
  using Error::Error;
};

// xi > 0 requested but all sub-likelihood values are equal.
class DegenerateTiltError : public Error {
 public:
  using Error::Error;
};

// Parameter outside the model support (|rho| >= 1, z <= 0, non-SPD Sigma).
class DomainError : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(const std::string& what, double smallest_eigenvalue)
      : Error(what), smallest_eigenvalue_(smallest_eigenvalue) {}
  double smallest_eigenvalue() const { return smallest_eigenvalue_; }

 private:
  double smallest_eigenvalue_;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

// A fit that a workflow needs did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace dmcle
