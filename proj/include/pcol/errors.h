#ifndef PCOL_ERRORS_H_
#define PCOL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace pcol {

// Every failure raised by the library carries one of these codes. The CLI
// maps ErrorCategory onto process exit codes.
enum class ErrorCode {
  kInvalidInput,
  kZeroRelativeVelocity,
  kDegenerateCovariance,
  kInvalidStep,
  kNonConvergence,
  kInvalidParams,
  kOverflow,
  kNoiseOverflow,
  kScaleMismatch,
  kLevelMismatch,
  kOutOfLevels,
  kScaleOverflow,
  kMissingRotationKey,
  kMissingParty,
  kBadShare,
  kProtocolOrder,
  kGridMismatch,
  kEmptyStore,
  kSerialization,
  kInternal,
};

enum class ErrorCategory {
  kUsage,     // malformed input, invalid flags or parameters
  kDomain,    // well-formed input with no meaningful answer
  kProtocol,  // multi-party session failures
  kInternal,
};

const char* ErrorCodeName(ErrorCode code);
ErrorCategory CategoryOf(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return CategoryOf(code_); }

 private:
  ErrorCode code_;
};

}  // namespace pcol

#endif  // PCOL_ERRORS_H_
