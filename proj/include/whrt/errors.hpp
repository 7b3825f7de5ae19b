#pragma once

#include <stdexcept>
#include <string>

namespace whrt {

// Base class for every error raised by the library. Callers that only care
// about "something went wrong" can catch this; the CLI maps the concrete
// types onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConstraint : public Error {
 public:
  using Error::Error;
};

class LengthTooLarge : public Error {
 public:
  using Error::Error;
};

class InfeasibleConstraint : public Error {
 public:
  using Error::Error;
};

// The constraint admits arbitrarily long runs of losses, so no lifted graph
// with a finite label set exists.
class UnboundedLosses : public Error {
 public:
  using Error::Error;
};

class InadmissibleLabel : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidFirstAttempt : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class IllConditionedG : public Error {
 public:
  using Error::Error;
};

class SingularS : public Error {
 public:
  using Error::Error;
};

class ZeroDisturbance : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace whrt
