#pragma once

#include <stdexcept>
#include <string>

namespace surfgrow {

enum class ErrorCode {
  InvalidArgument,
  UnknownId,
  InvalidMesh,
  NotFlippable,
  UnsupportedClass,
  DegenerateRest,
  DegenerateFace,
  EmptyInput,
  DuplicateBirth,
  RetireUnknown,
  Io,
  Format,
  ChecksumMismatch,
  Validation,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace surfgrow
