#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fasdoa {

enum class ErrorKind {
  InvalidArgument,
  UnsupportedSize,
  ResourceLimit,
  DegenerateConfiguration,
  UnidentifiableConfiguration,
  InfeasibleSpacing,
  TooManySources,
  NoContiguousCoarray,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this type; `kind()` is the
// machine-readable category, `what()` carries the human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::UnsupportedSize: return "unsupported-size";
    case ErrorKind::ResourceLimit: return "resource-limit";
    case ErrorKind::DegenerateConfiguration: return "degenerate-configuration";
    case ErrorKind::UnidentifiableConfiguration: return "unidentifiable-configuration";
    case ErrorKind::InfeasibleSpacing: return "infeasible-spacing";
    case ErrorKind::TooManySources: return "too-many-sources";
    case ErrorKind::NoContiguousCoarray: return "no-contiguous-coarray";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace fasdoa
