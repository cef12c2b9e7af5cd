#pragma once

#include <stdexcept>
#include <string>

#include "weyl/common.hpp"

namespace weyl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PoleError : Error {
  cplx location;
  PoleError(const std::string& what, cplx at) : Error(what), location(at) {}
};

struct RangeError : Error {
  using Error::Error;
};

// A documented precondition of an operation was not met by the caller.
struct PreconditionError : Error {
  using Error::Error;
};

struct DegenerateStationaryPoint : Error {
  using Error::Error;
};

struct BudgetExceeded : Error {
  using Error::Error;
};

struct ParseError : Error {
  std::string path;
  long line = 0;
  ParseError(const std::string& file, long lineno, const std::string& msg)
      : Error(file + ":" + std::to_string(lineno) + ": " + msg), path(file), line(lineno) {}
};

struct HeckeViolation : Error {
  long n = 0;
  long m1 = 0;
  long m2 = 0;
  HeckeViolation(const std::string& what, long n_, long a, long b)
      : Error(what), n(n_), m1(a), m2(b) {}
};

// A truncation chosen from a measured envelope would run past the range the quadrature grids were built for.
struct TruncationInsufficient : Error {
  using Error::Error;
};

// The form carries no root number, so the reflected half of the functional equation is unavailable.
struct MissingRootNumber : Error {
  using Error::Error;
};

struct ConsistencyError : Error {
  using Error::Error;
};

}  // namespace weyl
