#pragma once

#include <stdexcept>
#include <string>

namespace spintomo {

// Exit-code categories used by the CLI: 0 ok, 1 usage, 2 not injective,
// 3 inconsistent data, 4 degenerate input / no convergence, 5 I/O.
enum class ErrorCode : int {
  Usage = 1,
  NotInjective = 2,
  InconsistentData = 3,
  Degenerate = 4,
  Io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& msg)
      : Error(ErrorCode::Usage, msg) {}
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& msg)
      : Error(ErrorCode::Usage, msg) {}
};

// Measurement map rank-deficient on the trace-one slice.
struct NotInjective : Error {
  NotInjective(int rank, int deficit, const std::string& msg)
      : Error(ErrorCode::NotInjective, msg), rank(rank), deficit(deficit) {}
  int rank;
  int deficit;
};

struct NoInjectiveConfiguration : Error {
  explicit NoInjectiveConfiguration(const std::string& msg)
      : Error(ErrorCode::NotInjective, msg) {}
};

struct InconsistentData : Error {
  explicit InconsistentData(const std::string& msg)
      : Error(ErrorCode::InconsistentData, msg) {}
};

// Non-generic pure state: amplitude at index m below threshold.
struct ZeroAmplitude : Error {
  ZeroAmplitude(int index, const std::string& msg)
      : Error(ErrorCode::Degenerate, msg), index(index) {}
  int index;
};

struct NoConvergence : Error {
  explicit NoConvergence(const std::string& msg)
      : Error(ErrorCode::Degenerate, msg) {}
};

struct NoMatch : Error {
  explicit NoMatch(const std::string& msg)
      : Error(ErrorCode::Degenerate, msg) {}
};

struct Ambiguous : Error {
  explicit Ambiguous(const std::string& msg)
      : Error(ErrorCode::Degenerate, msg) {}
};

struct NotTripod : Error {
  explicit NotTripod(const std::string& msg)
      : Error(ErrorCode::Degenerate, msg) {}
};

struct NotOddParity : Error {
  explicit NotOddParity(const std::string& msg)
      : Error(ErrorCode::Degenerate, msg) {}
};

struct HoldoutInQuorum : Error {
  explicit HoldoutInQuorum(const std::string& msg)
      : Error(ErrorCode::Usage, msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorCode::Io, msg) {}
};

}  // namespace spintomo
