#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpr {

// Argument outside an operation's domain (bad length, out-of-range value, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// No probing scale produced a period estimate.
class DetectionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable input file, missing column or unparseable cell.
class IngestionError : public std::runtime_error {
 public:
  explicit IngestionError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(what), row_(row) {}

  // 1-based data row of the offending cell, 0 when not row-specific.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cpr
