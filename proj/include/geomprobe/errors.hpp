#pragma once

#include <stdexcept>
#include <string>

namespace geomprobe {

// Error taxonomy mirrors the CLI exit codes:
//   ParseError / ValidationError -> 2 (bad input)
//   NumericError                 -> 3 (degenerate geometry, non-convergence)
//   InfeasiblePriorError         -> 4 (simulation prior cannot be satisfied)
// Usage errors (bad flags) are handled by the CLI layer itself and exit 1.

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

class InfeasiblePriorError : public Error {
public:
  explicit InfeasiblePriorError(const std::string& msg) : Error(msg) {}
};

}  // namespace geomprobe
