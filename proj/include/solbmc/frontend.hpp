#pragma once

#include "solbmc/ast.hpp"
#include "solbmc/diagnostics.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace solbmc::frontend {

struct ParseResult {
  std::optional<ContractAst> ast;
  std::vector<Diagnostic> diagnostics;

  /// True when an AST was produced and nothing at all was reported.
  bool ok() const { return ast.has_value() && diagnostics.empty(); }
};

/// Parses and type-checks one source file, then runs the subset and
/// constructor validators. Syntax errors leave `ast` empty; type errors and
/// subset violations are reported alongside the AST.
ParseResult parse(std::string_view source);

/// Syntax only. Identifiers are left unresolved.
ParseResult parse_syntax(std::string_view source);

/// Resolves identifiers and annotates every expression with its type.
std::vector<Diagnostic> typecheck(ContractAst& ast);

/// Sol rules 1-9. An empty result means the contract is in the subset.
std::vector<Diagnostic> validate_subset(const ContractAst& ast);

/// Constructor statements that could throw or move value.
std::vector<Diagnostic> validate_constructor(const ContractAst& ast);

/// Renders the AST back to Solidity source. `parse(print(ast))` yields a
/// structurally equal AST.
std::string print_contract(const ContractAst& ast);
std::string print_expr(const Expr& e);

/// Structural equality ignoring spans and checker annotations.
bool equal_ast(const ContractAst& a, const ContractAst& b);
bool equal_stmt(const Stmt* a, const Stmt* b);
bool equal_expr(const Expr* a, const Expr* b);

} // namespace solbmc::frontend
