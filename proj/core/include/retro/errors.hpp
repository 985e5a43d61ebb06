#pragma once

#include <stdexcept>
#include <string>

namespace retro {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Fewer hits than requested occurred within the step budget (rational or
/// near-rational rotation); the sample is discarded by callers.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// The gap structure of the rotation could not be resolved at the working
/// precision; callers fall back to direct iteration.
class PrecisionLoss : public Error {
 public:
  using Error::Error;
};

/// An exit index with the wrong parity was supplied.
class ParityError : public Error {
 public:
  using Error::Error;
};

class HorizonExceeded : public Error {
 public:
  using Error::Error;
};

/// A trajectory passed within tolerance of a barrier tip.
class CornerHit : public Error {
 public:
  using Error::Error;
};

class Overflow : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

/// Lattice with coincident abscissae or a point on the tube boundary.
class DegenerateLattice : public Error {
 public:
  using Error::Error;
};

/// Exchange with fewer than three continuity intervals where three are needed.
class DegenerateMap : public Error {
 public:
  using Error::Error;
};

class EmptySample : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace retro
