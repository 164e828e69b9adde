#pragma once

#include <stdexcept>
#include <string>

namespace lgiecho {

// A value violates a type invariant (unnormalized state, non-Hermitian matrix, ...).
class InvariantViolation : public std::invalid_argument {
 public:
  explicit InvariantViolation(const std::string& what) : std::invalid_argument(what) {}
};

// An argument lies outside the domain of an operation (negative duration, t2 < t1, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A configuration block fails validation. `field` names the offending entry,
// e.g. "SourceParams.dark_rate".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// An estimator has no defined value for the supplied data (e.g. an empty
// noise window in a g2 measurement).
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lgiecho
