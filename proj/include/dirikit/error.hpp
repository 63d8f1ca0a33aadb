#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dirikit {

enum class ErrorCode {
  NonPositiveMeasure,
  SelfLoop,
  UnknownVertex,
  DuplicateVertex,
  DuplicateEdge,
  NegativeWeight,
  NonFinite,
  DimensionMismatch,
  InvalidSize,
  NegativeTime,
  NegativeInput,
  NotIrreducible,
  NotExcessive,
  NonPositive,
  NotIntertwining,
  SpaceMismatch,
  NotMarkovian,
  NotConnected,
  HasKilling,
  NotRecurrent,
  InvalidMetric,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveMeasure: return "NonPositiveMeasure";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::DuplicateVertex: return "DuplicateVertex";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NotExcessive: return "NotExcessive";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::NotIntertwining: return "NotIntertwining";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::NotMarkovian: return "NotMarkovian";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::HasKilling: return "HasKilling";
    case ErrorCode::NotRecurrent: return "NotRecurrent";
    case ErrorCode::InvalidMetric: return "InvalidMetric";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every precondition failure in the library surfaces as this exception;
/// `code()` identifies the violated contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Relative tolerance with an absolute floor: a residual r is accepted when
/// |r| <= rel * scale + abs.
struct Tolerance {
  double rel = 1e-9;
  double abs = 1e-12;

  double bound(double scale) const { return rel * std::abs(scale) + abs; }
  bool accepts(double residual, double scale) const { return std::abs(residual) <= bound(scale); }
};

}  // namespace dirikit
