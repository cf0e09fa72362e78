#pragma once

#include <stdexcept>
#include <string>

namespace bandlab {

// Every failure raised by the library derives from Error, so batch drivers can
// record a failed trial with a single catch.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct SingularMatrixError : Error {
  using Error::Error;
};

struct RankDeficientError : Error {
  using Error::Error;
};

struct SizeCapError : Error {
  using Error::Error;
};

/// Boundary frame violates det(ΠΠ*) = det(Ξ*Ξ) = 1 or has a singular Gram matrix.
struct FrameError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace bandlab
