#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lingrad {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller-side misuse: bad dimensions, non-finite input, out-of-range
/// parameters, unknown names.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// The explicit linear-gradient construction is undefined where the gradient
/// of V (nearly) vanishes; operations fail loudly instead of extrapolating.
class GradientTooSmallError : public Error {
 public:
  using Error::Error;
};

/// Real arithmetic left its domain (log of a non-positive value, division by
/// zero, overflow to non-finite). Never surfaces as NaN/Inf.
class EvaluationDomainError : public Error {
 public:
  using Error::Error;
};

/// An expression referenced a parameter with no bound value.
class UnboundParameterError : public Error {
 public:
  using Error::Error;
};

/// Expression-source error with 1-based location.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column)
      : Error(message + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// The implicit-step solver exhausted its iteration budget above tolerance.
class SolverDivergenceError : public Error {
 public:
  SolverDivergenceError(const std::string& message, int iterations,
                        double residual)
      : Error(message + " (iterations " + std::to_string(iterations) +
              ", residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 protected:
  // For wrappers whose message already embeds the diagnostics; avoids
  // appending the suffix a second time.
  struct Preformatted {};
  SolverDivergenceError(Preformatted, const std::string& message,
                        int iterations, double residual)
      : Error(message), iterations_(iterations), residual_(residual) {}

 private:
  int iterations_;
  double residual_;
};

/// The adaptive reference integrator could not make progress.
class StepSizeUnderflowError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lingrad
