#pragma once

#include <stdexcept>
#include <string>

namespace innerprec {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Malformed Matrix Market or vector input.
class ParseError : public Error {
public:
  using Error::Error;
};

/// A matrix required to be symmetric is not.
class NotSymmetricError : public Error {
public:
  using Error::Error;
};

/// A matrix required to be positive definite (or otherwise definite) is not.
class NotDefiniteError : public Error {
public:
  using Error::Error;
};

/// Dense analysis requested on an operand above the desk-scale cap.
class SizeCapError : public Error {
public:
  using Error::Error;
};

/// Invalid splitting parameters (omega, zero diagonal, side/kind mismatch).
class SplittingError : public Error {
public:
  using Error::Error;
};

/// A theorem hypothesis required by a bound or oracle does not hold.
class HypothesisError : public Error {
public:
  using Error::Error;
};

/// Internal consistency check failed; indicates a bug rather than bad input.
class ConsistencyError : public Error {
public:
  using Error::Error;
};

} // namespace innerprec
