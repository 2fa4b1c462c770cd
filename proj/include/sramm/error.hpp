#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sramm {

enum class ErrorCode {
  InvalidMatrix,
  ZeroMatrix,
  NotOrthonormal,
  InvalidParams,
  ShapeMismatch,
  InvalidLength,
  NormTooLarge,
  BarrierBreach,
  Infeasible,
  RankCollapse,
  SingularSystem,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sramm
