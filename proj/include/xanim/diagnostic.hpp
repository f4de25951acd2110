#pragma once

#include <string>
#include <vector>

namespace xanim {

/// Source location. Lines are 1-based, columns 0-based byte offsets with an
/// exclusive end. A zero line means "no source location".
struct SourceSpan {
  int line = 0;
  int col_start = 0;
  int col_end = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  SourceSpan span;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline Diagnostic error_at(std::string message, SourceSpan span = {}) {
  return {Severity::Error, std::move(message), span};
}

inline Diagnostic warning_at(std::string message, SourceSpan span = {}) {
  return {Severity::Warning, std::move(message), span};
}

std::string to_string(const Diagnostic& d);

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

}  // namespace xanim
