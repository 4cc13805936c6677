#pragma once

#include <stdexcept>
#include <string>

namespace reaper {

/// Argument outside the domain of a closed-form expression.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a precondition (mismatched sizes, odd node counts, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Newton iteration hit its cap or the residual blew up. Recoverable by
/// retrying with a smaller step.
class NewtonDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step size fell below the controller floor. Fatal for the run.
class StepTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Initial data failed a scenario validation (e.g. envelope u0' < phi0').
class EnvelopeViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid run configuration; carries the 1-based source line
/// when one is known (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Trajectory store missing, inconsistent, or tampered with.
class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reaper
