#pragma once

#include <stdexcept>
#include <string>

namespace nlss {

// Exit codes shared between library exceptions and the CLI front end.
// 0 is success, 1 is reserved for verify-suite failures, 2 for usage and
// manifest problems. Codes 20+ identify pipeline stages.
enum class ErrorCode : int {
  Usage = 2,
  NonContraction = 3,
  MaxIterExceeded = 4,
  SupportViolation = 5,
  IllConditionedExtrapolation = 6,
  AssumptionAViolated = 7,
  ReconstructionDiverged = 8,
  ZeroData = 9,
  EmptySupport = 11,
  Io = 12,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }
  virtual int exit_code() const { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

struct NonContraction : Error {
  explicit NonContraction(double ratio, int iteration)
      : Error(ErrorCode::NonContraction,
              "picard iteration stopped contracting: ratio " +
                  std::to_string(ratio) + " at iteration " +
                  std::to_string(iteration)),
        ratio(ratio) {}
  double ratio;
};

struct MaxIterExceeded : Error {
  explicit MaxIterExceeded(int max_iter)
      : Error(ErrorCode::MaxIterExceeded,
              "picard iteration did not reach tolerance in " +
                  std::to_string(max_iter) + " iterations") {}
};

struct SupportViolation : Error {
  explicit SupportViolation(const std::string& what)
      : Error(ErrorCode::SupportViolation, what) {}
};

struct IllConditionedExtrapolation : Error {
  explicit IllConditionedExtrapolation(const std::string& what)
      : Error(ErrorCode::IllConditionedExtrapolation, what) {}
};

struct AssumptionAViolated : Error {
  explicit AssumptionAViolated(const std::string& what)
      : Error(ErrorCode::AssumptionAViolated, what) {}
};

struct ReconstructionDiverged : Error {
  explicit ReconstructionDiverged(const std::string& what)
      : Error(ErrorCode::ReconstructionDiverged, what) {}
};

struct ZeroData : Error {
  explicit ZeroData(const std::string& what)
      : Error(ErrorCode::ZeroData, what) {}
};

struct EmptySupport : Error {
  explicit EmptySupport(const std::string& what)
      : Error(ErrorCode::EmptySupport, what) {}
};

struct UsageError : Error {
  explicit UsageError(const std::string& what)
      : Error(ErrorCode::Usage, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

}  // namespace nlss
