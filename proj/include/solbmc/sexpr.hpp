#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace solbmc::smt {

struct SExpr {
  bool atom = true;
  std::string text; // atom text; quoted symbols keep their bars
  std::vector<SExpr> list;

  std::string str() const;
};

class SExprError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Parses every top-level s-expression in `text`. Comments are skipped.
std::vector<SExpr> parse_sexprs(std::string_view text);

/// Parses exactly one s-expression.
SExpr parse_sexpr(std::string_view text);

/// True when `text` holds at least one complete top-level s-expression or
/// atom followed by whitespace (used to know when solver output is done).
bool complete_sexpr(std::string_view text);

} // namespace solbmc::smt
