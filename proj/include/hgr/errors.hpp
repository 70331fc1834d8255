#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hgr {

// Inputs with the wrong dimensions or mismatched grid specs.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Arguments outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Metric with no defined value (e.g. every class union is empty).
struct UndefinedMetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed binary file. `offset` is the byte position where parsing failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace hgr
