#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace henon {

/// Failure categories raised by the library. Each operation documents which
/// of these it may raise.
enum class ErrorCode {
  InvalidArgument,
  NonInvertible,
  NoRealFixedPoints,
  DegenerateConjugacy,
  Degenerate,
  SmallDivisor,
  BlowUp,
  NotAGraph,
  OutOfRange,
  NoInteriorMax,
  NewtonDiverged,
  NotGraphLike,
  FrameUnavailable,
  NoReturn,
  TangencyInside,
  ResolutionExhausted,
  LevelTooCoarse,
  ReturnNotFound,
  IllConditioned,
  EscapedBox,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonInvertible: return "NonInvertible";
    case ErrorCode::NoRealFixedPoints: return "NoRealFixedPoints";
    case ErrorCode::DegenerateConjugacy: return "DegenerateConjugacy";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::SmallDivisor: return "SmallDivisor";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::NotAGraph: return "NotAGraph";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoInteriorMax: return "NoInteriorMax";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::NotGraphLike: return "NotGraphLike";
    case ErrorCode::FrameUnavailable: return "FrameUnavailable";
    case ErrorCode::NoReturn: return "NoReturn";
    case ErrorCode::TangencyInside: return "TangencyInside";
    case ErrorCode::ResolutionExhausted: return "ResolutionExhausted";
    case ErrorCode::LevelTooCoarse: return "LevelTooCoarse";
    case ErrorCode::ReturnNotFound: return "ReturnNotFound";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::EscapedBox: return "EscapedBox";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace henon
