#pragma once

#include "json.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace solbmc {

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  unsigned line = 1;
  unsigned col = 1;
};

enum class DiagKind {
  SyntaxError,
  TypeError,
  SubsetViolation,      // rule is one of 1..9
  ConstructorViolation, // constructor may throw or moves value
};

struct Diagnostic {
  DiagKind kind = DiagKind::SyntaxError;
  int rule = 0;
  std::string message;
  SourceSpan span;
};

std::string_view kind_name(DiagKind kind);

/// `file:line:col: kind [rule N]: message`
std::string format_diagnostic(const Diagnostic& d, std::string_view file);

/// `{rule, message, line, col}` records, plus the diagnostic kind.
nlohmann::json diagnostics_to_json(const std::vector<Diagnostic>& diags);

bool has_errors(const std::vector<Diagnostic>& diags);

/// Raised by model construction when the input escapes what the model can
/// represent (e.g. two emits on one path, recursion that slipped past
/// validation).
class ModelError : public std::runtime_error {
public:
  enum class Kind { Cycle, MultiEmit, Unsupported, Internal };
  ModelError(Kind kind, const std::string& what, SourceSpan span = {})
      : std::runtime_error(what), kind_(kind), span_(span)
  {
  }
  Kind kind() const noexcept { return kind_; }
  const SourceSpan& span() const noexcept { return span_; }

private:
  Kind kind_;
  SourceSpan span_;
};

} // namespace solbmc
