#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace portthermo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or argument lies outside the admissible set of a function
/// (ln of a nonpositive number, division by zero, base point outside a
/// manifold's declared domain, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An intensive ratio was requested in a gauge whose denominator is zero.
class GaugeError : public Error {
 public:
  using Error::Error;
};

/// A precondition on the arguments was violated (dimension mismatch,
/// zero scale, point not on the Liouville submanifold, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A structural check failed while building an object (non-conserved
/// generator, E-dependent Hamiltonian in a power composition, ...).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace portthermo
