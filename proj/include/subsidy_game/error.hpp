#pragma once

#include <stdexcept>
#include <string>

namespace sg {

// Process exit codes shared by the CLI and the error hierarchy.
enum class ExitCode : int {
  ok = 0,
  tolerance_exceeded = 1,
  parse_or_validation = 2,
  infeasible = 3,
  numerical_failure = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_{line} {}

  int line() const noexcept { return line_; }
  ExitCode exit_code() const noexcept override { return ExitCode::parse_or_validation; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::parse_or_validation; }
};

class InfeasibleProgram : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::infeasible; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::numerical_failure; }
};

// Coefficient blow-up during backward integration.
class RiccatiEscape : public NumericalError {
 public:
  RiccatiEscape(double time, int segment)
      : NumericalError("Riccati finite-time escape at t=" + std::to_string(time) +
                       (segment >= 0 ? " (segment " + std::to_string(segment) + ")" : "")),
        time_{time},
        segment_{segment} {}

  double time() const noexcept { return time_; }
  int segment() const noexcept { return segment_; }

 private:
  double time_;
  int segment_;
};

// The first-order condition produced a price outside (0, inf).
class NonInteriorPrice : public NumericalError {
 public:
  explicit NonInteriorPrice(double price)
      : NumericalError("non-interior price " + std::to_string(price)), price_{price} {}

  double price() const noexcept { return price_; }

 private:
  double price_;
};

class GridExtrapolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sg
