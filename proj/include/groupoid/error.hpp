#pragma once

#include <stdexcept>
#include <string>

namespace groupoid {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tables reference ids that do not exist, or a composition entry sits on a
/// pair that is not composable. Distinct from an axiom violation.
class MalformedTable : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Quotient composition depends on the choice of representatives.
class QuotientUndefined : public Error {
 public:
  using Error::Error;
};

/// A configurable size cap was exceeded (isomorphism search, commutant).
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

/// A group multiplication table fails the group axioms.
class InvalidGroup : public Error {
 public:
  using Error::Error;
};

/// Input file could not be parsed. `where` is a byte offset or a JSON pointer.
class ParseError : public Error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : Error(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Iterative method did not converge within its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace groupoid
