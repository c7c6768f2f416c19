#include "ttd/errors.hpp"

namespace ttd {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidTrain: return "InvalidTrain";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::PsdSearchFailed: return "PsdSearchFailed";
    case ErrorCode::DegenerateInnerProduct: return "DegenerateInnerProduct";
    case ErrorCode::EmptyDecomposition: return "EmptyDecomposition";
    case ErrorCode::DegenerateContraction: return "DegenerateContraction";
    case ErrorCode::NoSymmetrizer: return "NoSymmetrizer";
    case ErrorCode::CompletionAmbiguous: return "CompletionAmbiguous";
    case ErrorCode::DecompositionFailed: return "DecompositionFailed";
    case ErrorCode::InvalidInflation: return "InvalidInflation";
    case ErrorCode::ZeroEntry: return "ZeroEntry";
    case ErrorCode::DegenerateStart: return "DegenerateStart";
    case ErrorCode::SingularScaling: return "SingularScaling";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "UnknownError";
}

}  // namespace ttd
