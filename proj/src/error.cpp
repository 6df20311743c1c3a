#include "error.hpp"

namespace surfgrow {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::InvalidMesh: return "InvalidMesh";
    case ErrorCode::NotFlippable: return "NotFlippable";
    case ErrorCode::UnsupportedClass: return "UnsupportedClass";
    case ErrorCode::DegenerateRest: return "DegenerateRest";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DuplicateBirth: return "DuplicateBirth";
    case ErrorCode::RetireUnknown: return "RetireUnknown";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Format: return "FormatError";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::Validation: return "ValidationFailure";
  }
  return "Unknown";
}

}  // namespace surfgrow
