#pragma once

#include <stdexcept>
#include <string>

namespace markovcat {

/// Raised when morphisms or objects do not fit together (shape or instance
/// mismatch, invalid partition, non-stationary initial state, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when raw numeric data fails instance validation.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(const std::string& msg, std::size_t row, std::size_t column)
      : std::invalid_argument(msg), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Raised when a brute-force construction would exceed its size cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace markovcat
