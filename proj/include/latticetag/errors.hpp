#pragma once

#include <stdexcept>
#include <string>

namespace latticetag {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operands disagree in length or modulus.
class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

// Parameter set violates its invariants (q not prime, m <= n, ...).
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error(what) {}
};

// A credential fails its invariants (A*x != y, zero identity, norm bound).
class InvalidCredential : public Error {
 public:
  explicit InvalidCredential(const std::string& what) : Error(what) {}
};

// Persistent data is structurally bad (magic, truncation, invariants).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(what) {}
};

// Filesystem-level failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// A role operation was handed a credential for the wrong role.
class RoleMismatch : public Error {
 public:
  explicit RoleMismatch(const std::string& what) : Error(what) {}
};

// A session was driven out of order or reused after being consumed.
class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error(what) {}
};

// A wire frame cannot be decoded.
class MalformedFrame : public Error {
 public:
  explicit MalformedFrame(const std::string& what) : Error(what) {}
};

// An attack script references a frame that does not exist.
class ScriptError : public Error {
 public:
  explicit ScriptError(const std::string& what) : Error(what) {}
};

// Instrumented operation tallies deviate from the closed-form model.
class CounterMismatch : public Error {
 public:
  explicit CounterMismatch(const std::string& what) : Error(what) {}
};

}  // namespace latticetag
