#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace skewbound {

enum class ErrorCode {
  NotSquare,
  NonFinite,
  NotHermitian,
  NotPositive,
  NotNormalized,
  DimMismatch,
  OrderTooLarge,
  OddOrder,
  OddOrderSum,
  MissingMoment,
  RankSaturated,
  ZeroFisherInformation,
  DegenerateSurface,
  InvalidGeometry,
  IncompleteFrame,
  InvalidArgument,
  Parse,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::OrderTooLarge: return "OrderTooLarge";
    case ErrorCode::OddOrder: return "OddOrder";
    case ErrorCode::OddOrderSum: return "OddOrderSum";
    case ErrorCode::MissingMoment: return "MissingMoment";
    case ErrorCode::RankSaturated: return "RankSaturated";
    case ErrorCode::ZeroFisherInformation: return "ZeroFisherInformation";
    case ErrorCode::DegenerateSurface: return "DegenerateSurface";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::IncompleteFrame: return "IncompleteFrame";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// %.6g, for diagnostics.
inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Exception carrying a machine-readable code; what() is "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace skewbound
