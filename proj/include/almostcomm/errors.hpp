#pragma once

#include <stdexcept>
#include <string>

namespace almostcomm {

// Base for every error raised by the library. The CLI maps subclasses to
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

/// Algebra closure did not stabilize within the requested word degree.
class DegreeExceeded : public Error {
 public:
  using Error::Error;
};

/// A random draw produced eigenvalue clusters that could not be separated.
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

/// Block dimensions came out non-integral; the input is not a *-algebra at
/// the requested tolerance.
class NotSemisimpleWithinTol : public Error {
 public:
  using Error::Error;
};

class ResidualTooLarge : public Error {
 public:
  using Error::Error;
};

}  // namespace almostcomm
