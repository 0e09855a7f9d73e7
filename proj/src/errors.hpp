#pragma once

#include <stdexcept>
#include <string>

namespace critwave {

// Root of every error raised by the library. The C API maps the subclasses
// onto its status codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, grids that are too small, malformed config files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A numerical guard tripped: non-convergence, bad bracket, failed fit.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised by the time stepper when the solution leaves the representable
// range. Carries the time at which it happened.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(double t, const std::string& what) : NumericalError(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace critwave
