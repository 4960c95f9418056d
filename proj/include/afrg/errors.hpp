#pragma once

#include <stdexcept>
#include <string>

namespace afrg {

// Precondition or argument-range violation.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Inconsistent or unusable configuration detected at construction/load time.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Broken streaming contract (e.g. a timestamp gap between audio blocks).
class StreamError : public std::runtime_error {
 public:
  StreamError(const std::string& what, double gap_seconds)
      : std::runtime_error(what), gap_seconds(gap_seconds) {}
  double gap_seconds;
};

// Unreadable, truncated, or incompatible file contents.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace afrg
