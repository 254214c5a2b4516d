#ifndef MEDLI_ERROR_HPP
#define MEDLI_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace medli {

enum class ErrorCode {
  NotHermitian,
  NotPSD,
  NotPD,
  NotProjector,
  NotOrthogonal,
  NotComplete,
  DimensionMismatch,
  PriorsInvalid,
  StateNotDensity,
  NotLinearlyIndependent,
  RankSumMismatch,
  InvalidSignature,
  SigmaSingular,
  NotProjectiveAfterPGM,
  NotOptimalPair,
  RankSignatureMismatch,
  NotProjective,
  SolverFailed,
  BudgetExceeded,
  NoConvergence,
  PDConstructionFailed,
  NotTwoState,
  InvalidTolerances,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotPD: return "NotPD";
    case ErrorCode::NotProjector: return "NotProjector";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::NotComplete: return "NotComplete";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::PriorsInvalid: return "PriorsInvalid";
    case ErrorCode::StateNotDensity: return "StateNotDensity";
    case ErrorCode::NotLinearlyIndependent: return "NotLinearlyIndependent";
    case ErrorCode::RankSumMismatch: return "RankSumMismatch";
    case ErrorCode::InvalidSignature: return "InvalidSignature";
    case ErrorCode::SigmaSingular: return "SigmaSingular";
    case ErrorCode::NotProjectiveAfterPGM: return "NotProjectiveAfterPGM";
    case ErrorCode::NotOptimalPair: return "NotOptimalPair";
    case ErrorCode::RankSignatureMismatch: return "RankSignatureMismatch";
    case ErrorCode::NotProjective: return "NotProjective";
    case ErrorCode::SolverFailed: return "SolverFailed";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::PDConstructionFailed: return "PDConstructionFailed";
    case ErrorCode::NotTwoState: return "NotTwoState";
    case ErrorCode::InvalidTolerances: return "InvalidTolerances";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace medli

#endif  // MEDLI_ERROR_HPP
