#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ovd {

/// Invalid parameters or malformed configuration input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A function was evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Integration produced a non-finite state.
class IntegrationDiverged : public std::runtime_error {
 public:
  IntegrationDiverged(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Growth rate requested over a window where the amplitude is not positive.
class UndefinedGrowth : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ovd
