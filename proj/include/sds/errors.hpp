#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sds {

/// Invalid or inconsistent configuration (bad parameters, unknown keys).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical failure inside a simulation, located by replica and step.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::uint64_t replica, std::uint64_t step)
      : std::runtime_error(what + " (replica " + std::to_string(replica) + ", step " +
                           std::to_string(step) + ")"),
        replica_(replica),
        step_(step) {}

  std::uint64_t replica() const noexcept { return replica_; }
  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t replica_;
  std::uint64_t step_;
};

/// An exact identity that must hold was observed to fail.
class IdentityViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace sds
