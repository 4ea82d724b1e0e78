#pragma once

#include <stdexcept>
#include <string>

namespace stochrelax {

/// Operands whose dimensions disagree (spin length vs n, theta vs basis, ...).
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A size guard tripped: exact-engine cap, subset-enumeration cap, variable cap.
struct LimitError : std::length_error {
  using std::length_error::length_error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Malformed text input; carries the 1-based line number when known.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Linear system that stays singular after ridge escalation.
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace stochrelax
