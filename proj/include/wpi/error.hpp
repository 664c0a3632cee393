#pragma once

#include <stdexcept>
#include <string>

namespace wpi {

enum class ErrorKind {
  InvalidInput,
  InvalidCertificate,
  NumericalFailure,
  DivergentIntegral,
  NonVanishingGamma,
  DomainError,
  ShapeViolation,
  AssumptionViolated,
  DivergentB,
  IncomparableSieves,
  ZeroMassState,
  NotReversible,
  MassAtOne,
  TooLarge,
  EmptyRestriction,
  ZeroConductance,
  BracketViolation,
  TruncationTooSmall,
  BadSupport,
  RegimeViolation,
  DriftViolated,
  RangeError,
  MinorizationFails,
  ZeroFunction,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::InvalidCertificate: return "InvalidCertificate";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::DivergentIntegral: return "DivergentIntegral";
    case ErrorKind::NonVanishingGamma: return "NonVanishingGamma";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::ShapeViolation: return "ShapeViolation";
    case ErrorKind::AssumptionViolated: return "AssumptionViolated";
    case ErrorKind::DivergentB: return "DivergentB";
    case ErrorKind::IncomparableSieves: return "IncomparableSieves";
    case ErrorKind::ZeroMassState: return "ZeroMassState";
    case ErrorKind::NotReversible: return "NotReversible";
    case ErrorKind::MassAtOne: return "MassAtOne";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::EmptyRestriction: return "EmptyRestriction";
    case ErrorKind::ZeroConductance: return "ZeroConductance";
    case ErrorKind::BracketViolation: return "BracketViolation";
    case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::BadSupport: return "BadSupport";
    case ErrorKind::RegimeViolation: return "RegimeViolation";
    case ErrorKind::DriftViolated: return "DriftViolated";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::MinorizationFails: return "MinorizationFails";
    case ErrorKind::ZeroFunction: return "ZeroFunction";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace wpi
