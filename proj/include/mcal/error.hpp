#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcal {

enum class ErrorKind {
  InsufficientData,
  NonPositiveError,
  DegenerateDesign,
  InvalidRange,
  InvalidDistribution,
  DeltaTooLarge,
  EmptyTestSet,
  EmptyTrainingSet,
  LabelOutOfRange,
  DimensionMismatch,
  InvalidParams,
  ParseError,
  EmptyFile,
  IoError,
  IndexOutOfRange,
  AlreadyLabeled,
  DatasetTooSmall,
  PartitionViolation,
  ConfigError,
  SchemaViolation,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::NonPositiveError: return "NonPositiveError";
    case ErrorKind::DegenerateDesign: return "DegenerateDesign";
    case ErrorKind::InvalidRange: return "InvalidRange";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::DeltaTooLarge: return "DeltaTooLarge";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::AlreadyLabeled: return "AlreadyLabeled";
    case ErrorKind::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorKind::PartitionViolation: return "PartitionViolation";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

}  // namespace mcal
