#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crvr {

/// Invalid user-supplied configuration or parameter.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file row.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Loaded data references something that does not exist, or breaks a type invariant.
class IntegrityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a model function.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Caller broke an operation precondition.
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace crvr
