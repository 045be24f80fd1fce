#pragma once

#include <stdexcept>
#include <string>

namespace fsi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Vector or series dimensions do not match the operator they are fed to.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of the operation (s outside [0,1], t outside [0,T]).
class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class LawCertificationError : public Error {
 public:
  using Error::Error;
};

class NonlinearDivergenceError : public Error {
 public:
  NonlinearDivergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace fsi
