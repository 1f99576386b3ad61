#pragma once

#include <stdexcept>
#include <string>

namespace pjipm {

enum class ErrorCode {
  InvalidArgument,
  PreparationFailed,
  ConstructionFailed,
  ConfigError,
  IoError,
  NumericalFailure,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::PreparationFailed: return "PREPARATION_FAILED";
    case ErrorCode::ConstructionFailed: return "CONSTRUCTION_FAILED";
    case ErrorCode::ConfigError: return "CONFIG_ERROR";
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::NumericalFailure: return "NUMERICAL_FAILURE";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, const std::string& msg, ErrorCode code = ErrorCode::InvalidArgument) {
  if (!cond) throw Error(code, msg);
}

}  // namespace pjipm
