#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lyapnav {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix length disagreed with what the operation requires.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what_arg, std::size_t expected, std::size_t actual)
      : Error(what_arg + ": expected length " + std::to_string(expected) + ", got " +
              std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Invalid parameters, malformed worlds and config-file problems.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operation called in a state where it is not legal (e.g. stepping a finished episode).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lyapnav
