#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kakulab {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input looks rational (or is resolved beyond its precision) during expansion.
class PrecisionError : public std::runtime_error {
 public:
  PrecisionError(const std::string& what, int index)
      : std::runtime_error(what), index_(index) {}
  int index() const noexcept { return index_; }

 private:
  int index_;
};

/// A computation needs more convergents, iterates or samples than allowed.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An orbit point landed within the guard radius of the cusp at 0.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, std::int64_t iterate)
      : std::runtime_error(what), iterate_(iterate) {}
  std::int64_t iterate() const noexcept { return iterate_; }

 private:
  std::int64_t iterate_;
};

/// Caller combined arguments that cannot be used together.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace kakulab
