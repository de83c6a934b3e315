#pragma once

#include <stdexcept>
#include <string>

namespace shapedos {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent experiment configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A numerical routine failed to reach its tolerance within budget (exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Arguments violate a documented precondition (exit code 4).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Thrown when an explicitly requested Chebyshev degree cannot meet the
// polynomial tolerance.
class DegreeInsufficient : public NumericalError {
 public:
  DegreeInsufficient(int requested, int required, double bound)
      : NumericalError("Chebyshev degree " + std::to_string(requested) +
                       " is insufficient; tolerance requires degree " +
                       std::to_string(required)),
        requested_(requested),
        required_(required),
        bound_(bound) {}

  int requested() const noexcept { return requested_; }
  int required() const noexcept { return required_; }
  double bound_at_requested() const noexcept { return bound_; }

 private:
  int requested_;
  int required_;
  double bound_;
};

}  // namespace shapedos
