#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace srlt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An element, law, or function does not belong to the group space it is used with.
class GroupMismatch : public Error {
 public:
  using Error::Error;
};

/// A grid-lie element lies outside the quadrature window.
class OutsideWindow : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::size_t required, std::size_t budget, std::size_t step = 0)
      : Error("support budget exceeded: " + std::to_string(required) + " atoms required, budget " +
              std::to_string(budget) + (step ? " (at step " + std::to_string(step) + ")" : "")),
        required_(required),
        budget_(budget),
        step_(step) {}

  std::size_t required() const noexcept { return required_; }
  std::size_t budget() const noexcept { return budget_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t required_;
  std::size_t budget_;
  std::size_t step_;
};

/// Quadrature truncation lost more mass than the configured bound.
class TruncationExceeded : public Error {
 public:
  using Error::Error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

/// The Laplace transform of the law has no interior minimum.
class NoInteriorMinimum : public Error {
 public:
  using Error::Error;
};

/// Twisted law mass differs from one: (R, phi) are not a consistent pair.
class InconsistentTwist : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace srlt
