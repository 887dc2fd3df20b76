#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cfsp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; `line()` is 1-based, 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The constraint set admits no solution (or none was found where one must exist).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Optimal thresholding found no threshold set passing the feasibility predicate.
class NoFeasibleThreshold : public Error {
 public:
  using Error::Error;
};

/// RatioDCA produced a non-decreasing ratio despite a negative inner optimum.
class DescentViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace cfsp
