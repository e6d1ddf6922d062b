#pragma once

#include <stdexcept>
#include <string>

namespace fekete {

enum class ErrorKind {
  ZeroPoint,
  CutLocus,
  NearCutLocus,
  ChartSingularity,
  CoincidentPoints,
  DiagonalConfiguration,
  ZeroAngle,
  AmbiguousHalfway,
  StepFailure,
  ParseError,
  ValidationError,
  InvalidArgument,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::ZeroPoint: return "ZeroPoint";
    case ErrorKind::CutLocus: return "CutLocus";
    case ErrorKind::NearCutLocus: return "NearCutLocus";
    case ErrorKind::ChartSingularity: return "ChartSingularity";
    case ErrorKind::CoincidentPoints: return "CoincidentPoints";
    case ErrorKind::DiagonalConfiguration: return "DiagonalConfiguration";
    case ErrorKind::ZeroAngle: return "ZeroAngle";
    case ErrorKind::AmbiguousHalfway: return "AmbiguousHalfway";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised for a specific agent pair (0-based) or a single agent (j = -1).
class PairError : public Error {
 public:
  PairError(ErrorKind kind, int i, int j, const std::string& what)
      : Error(kind, what + " (agents " + std::to_string(i + 1) +
                        (j >= 0 ? ", " + std::to_string(j + 1) : std::string()) + ")"),
        i_(i), j_(j) {}
  int first() const noexcept { return i_; }
  int second() const noexcept { return j_; }

 private:
  int i_, j_;
};

class StepFailure : public Error {
 public:
  StepFailure(double t, const std::string& cause)
      : Error(ErrorKind::StepFailure, "at t = " + std::to_string(t) + ": " + cause), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& where, int line, int column, const std::string& msg)
      : Error(ErrorKind::ParseError, where + ":" + std::to_string(line) + ":" +
                                         std::to_string(column) + ": " + msg),
        line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_, column_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& msg)
      : Error(ErrorKind::ValidationError, field + ": " + msg), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace fekete
