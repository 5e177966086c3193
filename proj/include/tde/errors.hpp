#pragma once

#include <stdexcept>
#include <string>

namespace tde {

/// Invalid model, grid, or estimator parameter.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Point outside the support of a density or basis.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical evaluation failed (overflow, non-finite result).
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad experiment configuration; `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Model selection could not produce a result.
class SelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tde
