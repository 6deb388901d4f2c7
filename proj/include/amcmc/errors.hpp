#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace amcmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed program or goal text. Carries a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  /// The same error located in a named source, as `source:line:column: message`.
  ParseError(const std::string& source, const ParseError& inner)
      : Error(source + ":" + inner.what()), line_(inner.line_), column_(inner.column_) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed text that violates a program invariant (bad distribution,
/// overlapping values declarations, unknown switch, ...).
class ProgramError : public Error {
 public:
  using Error::Error;
};

/// Failure during goal evaluation.
class EvalError : public Error {
 public:
  using Error::Error;
};

class StepLimitExceeded : public EvalError {
 public:
  explicit StepLimitExceeded(std::size_t limit)
      : EvalError("resolution step limit (" + std::to_string(limit) +
                  ") exceeded; the SLD tree may be infinite") {}
};

/// Inference-level failure: unsatisfiable evidence, no consistent samples,
/// branch limit exhausted.
class InferenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace amcmc
