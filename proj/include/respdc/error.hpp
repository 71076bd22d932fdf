#pragma once

#include <stdexcept>
#include <string>

namespace respdc {

// Physics or numerical domain violation. The CLI maps these to exit status 1.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Grid too coarse for the requested evaluation; carries the point count that would satisfy the guard.
class ResolutionError : public DomainError {
 public:
  ResolutionError(const std::string& what, long long required)
      : DomainError(what), required_(required) {}
  long long required() const { return required_; }

 private:
  long long required_;
};

// Malformed or inconsistent configuration input. The CLI maps these to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace respdc
