#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace convaudit {

enum class ErrorKind {
  MalformedInput,
  CycleDetected,
  DanglingReference,
  DuplicateId,
  DumpUnreadable,
  EmptyInput,
  InsufficientModels,
  PathExplosion,
  UnknownEnumValue,
  MissingField,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::DumpUnreadable: return "DumpUnreadable";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InsufficientModels: return "InsufficientModels";
    case ErrorKind::PathExplosion: return "PathExplosion";
    case ErrorKind::UnknownEnumValue: return "UnknownEnumValue";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

// Every failure raised by the library. `subject` names the offending
// element (value name, node id, file path, model id, ...).
class AuditError : public std::runtime_error {
 public:
  AuditError(ErrorKind kind, std::string subject, const std::string& detail = {})
      : std::runtime_error(format(kind, subject, detail)),
        kind_(kind),
        subject_(std::move(subject)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  static std::string format(ErrorKind kind, const std::string& subject,
                            const std::string& detail) {
    std::string msg(to_string(kind));
    msg += "(" + subject + ")";
    if (!detail.empty()) msg += ": " + detail;
    return msg;
  }

  ErrorKind kind_;
  std::string subject_;
};

}  // namespace convaudit
