#pragma once

#include <stdexcept>
#include <string>

namespace ttd {

enum class ErrorCode {
  InvalidTrain,
  DimensionError,
  NumericalError,
  DivisionByZero,
  PsdSearchFailed,
  DegenerateInnerProduct,
  EmptyDecomposition,
  DegenerateContraction,
  NoSymmetrizer,
  CompletionAmbiguous,
  DecompositionFailed,
  InvalidInflation,
  ZeroEntry,
  DegenerateStart,
  SingularScaling,
  NotConverged,
  InvalidConfig,
  IoError,
  ParseError,
};

const char* error_code_name(ErrorCode code);

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* code_name() const { return error_code_name(code_); }

private:
  ErrorCode code_;
};

}  // namespace ttd
