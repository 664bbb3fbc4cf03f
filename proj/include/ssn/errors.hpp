#pragma once

#include <stdexcept>
#include <string>

namespace ssn {

/// Base class for all solver library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Stacked basis matrix [A;B] has column rank below n.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// Subspace is not regular: the B part of every basis is singular.
class NotRegular : public Error {
 public:
  using Error::Error;
};

/// A point claimed to lie on a mapping graph violates the graph equations.
class GraphViolation : public Error {
 public:
  using Error::Error;
};

/// Limit-subspace enumeration requested at a stratum that is a singleton.
class WrongStratum : public Error {
 public:
  using Error::Error;
};

/// Newton system factorization failed or the iterative solver stagnated.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// No step length in the candidate sequence satisfied the acceptance test.
class LineSearchFailed : public Error {
 public:
  using Error::Error;
};

/// Outer iteration limit reached before the residual tolerance.
class MaxItersExceeded : public Error {
 public:
  using Error::Error;
};

/// An inner smooth solve did not converge.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// GMRES hit its inner iteration limit.
class Stagnation : public Error {
 public:
  using Error::Error;
};

/// ILU(0) met a zero pivot.
class ZeroPivot : public Error {
 public:
  using Error::Error;
};

/// Material parameters outside the admissible range.
class InvalidMaterial : public Error {
 public:
  using Error::Error;
};

/// Non-positive Jacobian determinant at a quadrature point.
class DegenerateElement : public Error {
 public:
  using Error::Error;
};

/// Warm-start data does not match the expected coarser discretization.
class LevelMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace ssn
