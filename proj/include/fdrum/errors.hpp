#pragma once

#include <stdexcept>
#include <string>

namespace fdrum {

// Caller supplied an invalid argument (dimension mismatch, out-of-range value).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// IFS cannot be handled by the requested operation (e.g. not grid aligned).
class UnsupportedIfsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Line-anchored failure while reading an IFS definition.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Base for failures of a numerical nature; the CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class PoleError : public NumericalError {
 public:
  PoleError(const std::string& what, double eigenvalue)
      : NumericalError(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

// Laplacian eigenvalue with the wrong sign for a Dirichlet operator.
class MatrixConventionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Spectrum contains magnitudes <= 1 where log-ratios would change sign.
class IllConditionedSpectrumError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fdrum
