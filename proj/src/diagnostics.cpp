#include "solbmc/diagnostics.hpp"

#include <sstream>

namespace solbmc {

std::string_view kind_name(DiagKind kind)
{
  switch (kind) {
  case DiagKind::SyntaxError:
    return "syntax error";
  case DiagKind::TypeError:
    return "type error";
  case DiagKind::SubsetViolation:
    return "subset violation";
  case DiagKind::ConstructorViolation:
    return "constructor violation";
  }
  return "error";
}

std::string format_diagnostic(const Diagnostic& d, std::string_view file)
{
  std::ostringstream os;
  os << file << ':' << d.span.line << ':' << d.span.col << ": " << kind_name(d.kind);
  if (d.rule != 0)
    os << " [rule " << d.rule << ']';
  os << ": " << d.message;
  return os.str();
}

nlohmann::json diagnostics_to_json(const std::vector<Diagnostic>& diags)
{
  auto out = nlohmann::json::array();
  for (const auto& d : diags) {
    out.push_back({{"rule", d.rule},
                   {"kind", std::string(kind_name(d.kind))},
                   {"message", d.message},
                   {"line", d.span.line},
                   {"col", d.span.col}});
  }
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags)
{
  return !diags.empty();
}

} // namespace solbmc
