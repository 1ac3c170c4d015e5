#pragma once

#include <stdexcept>
#include <string>

namespace prochern {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Operands belong to different atom tables, parents, towers or endpoints.
class MismatchError : public Error {
public:
  using Error::Error;
};

// Bad value inside one operand: unknown symbol, undeclared denominator,
// zero fiber class, invalid dimension, and the like.
class DomainError : public Error {
public:
  using Error::Error;
};

// A multiplier p (or p_n) in limit arithmetic is zero.  Kept separate from
// DomainError: the inductive limit degenerates to 0 in that case and callers
// may want to distinguish it.
class ZeroMultiplierError : public Error {
public:
  using Error::Error;
};

// Piecewise-trivial (strict) factorization cls(s) = cls(f(s))*F_s fails.
class StrictnessError : public Error {
public:
  using Error::Error;
};

// A stable_* operation received a function that failed its stability check.
class StabilityError : public Error {
public:
  using Error::Error;
};

// Level out of range: lifting below the current level, or realizing a level
// past the end of a finite tower.
class LevelError : public Error {
public:
  using Error::Error;
};

} // namespace prochern
