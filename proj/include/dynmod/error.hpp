#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dynmod {

// Error taxonomy shared by all modules. The CLI maps kinds to exit codes.
enum class ErrorKind {
  Parse,
  Signature,
  Schema,
  Monotonicity,
  Range,
  Headroom,
  StageEscape,
  ChooserViolation,
  Budget,
  Depth,
  Exhausted,
  Persistence,
  ContextCoherence,
  MalformedMap,
  RangeEscape,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Signature: return "SignatureError";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Monotonicity: return "MonotonicityError";
    case ErrorKind::Range: return "RangeError";
    case ErrorKind::Headroom: return "HeadroomExceeded";
    case ErrorKind::StageEscape: return "StageEscape";
    case ErrorKind::ChooserViolation: return "ChooserViolation";
    case ErrorKind::Budget: return "BudgetExceeded";
    case ErrorKind::Depth: return "DepthExceeded";
    case ErrorKind::Exhausted: return "Exhausted";
    case ErrorKind::Persistence: return "PersistenceError";
    case ErrorKind::ContextCoherence: return "ContextCoherenceError";
    case ErrorKind::MalformedMap: return "MalformedMap";
    case ErrorKind::RangeEscape: return "RangeEscape";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  Error(ErrorKind kind, const std::string& message, std::size_t position)
      : std::runtime_error(std::string(to_string(kind)) + " at " +
                           std::to_string(position) + ": " + message),
        kind_(kind),
        position_(position) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Byte offset into the input; meaningful for ErrorKind::Parse only.
  std::size_t position() const noexcept { return position_; }

 private:
  ErrorKind kind_;
  std::size_t position_ = 0;
};

}  // namespace dynmod
