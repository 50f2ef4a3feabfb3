#pragma once

#include <stdexcept>
#include <string>

namespace dtnlab {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid user input: grid sizes, potential bounds, malformed config files.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A factorization hit a (numerically) singular system, e.g. a spectral shift
// landing on a generalized eigenvalue. Reported distinctly from mere
// ill-conditioning so callers can tell "move the shift" from "refine".
class SingularSystemError : public Error {
 public:
  explicit SingularSystemError(const std::string& msg) : Error(msg) {}
};

// The dense symmetric eigensolver failed to converge. Never silently
// truncated: all downstream identities need the complete spectrum.
class EigenSolveError : public Error {
 public:
  explicit EigenSolveError(const std::string& msg) : Error(msg) {}
};

}  // namespace dtnlab
