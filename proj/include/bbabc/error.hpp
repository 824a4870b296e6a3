#ifndef BBABC_ERROR_HPP
#define BBABC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bbabc {

/// Argument outside the mathematical domain of a function (e.g. log_gamma(0)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Evaluation at a pole of a closed-form expression.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Invalid distribution or model parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Data without enough variation for the requested statistic or estimator.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown names, inconsistent settings, malformed input files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bbabc

#endif  // BBABC_ERROR_HPP
