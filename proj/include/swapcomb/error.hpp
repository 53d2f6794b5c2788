#pragma once

#include <stdexcept>
#include <string>

namespace swapcomb {

enum class ErrorCode {
  kEmptySupport,
  kNotPsd,
  kInfeasibleDomain,
  kTooLarge,
  kDegenerateSet,
  kNotInHull,
  kNoConvergence,
  kOmdPreconditionViolated,
  kInvalidArgument,
  kConfig,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptySupport: return "EmptySupport";
    case ErrorCode::kNotPsd: return "NotPSD";
    case ErrorCode::kInfeasibleDomain: return "InfeasibleDomain";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kDegenerateSet: return "DegenerateSet";
    case ErrorCode::kNotInHull: return "NotInHull";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kOmdPreconditionViolated: return "OmdPreconditionViolated";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace swapcomb
