#pragma once

#include <stdexcept>
#include <string>

namespace dctl {

enum class ErrorCode {
  ClusterTooLarge,
  NotOnGamma,
  GridTooCoarse,
  NotPositiveDefinite,
  SolveFailure,
  IllConditioned,
  ClusterSingular,
  NoContraction,
  BlowUp,
  DegenerateFit,
  ZeroDenominator,
  InvalidArgument,
  ConfigError,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
public:
  Error(ErrorCode c, const std::string& msg)
      : std::runtime_error(std::string(error_name(c)) + ": " + msg), code_(c) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

}  // namespace dctl
