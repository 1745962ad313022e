#include "solbmc/ast.hpp"

#include <algorithm>

namespace solbmc::frontend {

SolType SolType::mapping(SolType key, SolType value)
{
  SolType t;
  t.kind = TypeKind::Mapping;
  t.key = std::make_shared<const SolType>(std::move(key));
  t.elem = std::make_shared<const SolType>(std::move(value));
  return t;
}

SolType SolType::static_array(SolType elem, std::uint64_t length)
{
  SolType t;
  t.kind = TypeKind::StaticArray;
  t.elem = std::make_shared<const SolType>(std::move(elem));
  t.length = length;
  return t;
}

std::string SolType::str() const
{
  switch (kind) {
  case TypeKind::Void:
    return "void";
  case TypeKind::Uint:
    return bits == 256 ? "uint" : "uint" + std::to_string(bits);
  case TypeKind::Int:
    return bits == 256 ? "int" : "int" + std::to_string(bits);
  case TypeKind::Bool:
    return "bool";
  case TypeKind::Address:
    return "address";
  case TypeKind::Enum:
  case TypeKind::Contract:
    return name;
  case TypeKind::Mapping:
    return "mapping(" + key->str() + " => " + elem->str() + ")";
  case TypeKind::StaticArray:
    return elem->str() + "[" + std::to_string(length) + "]";
  case TypeKind::DynamicArray:
    return elem->str() + "[]";
  case TypeKind::String:
    return "string";
  case TypeKind::Bytes:
    return "bytes";
  case TypeKind::FixedBytes:
    return bits == 8 ? "byte" : "bytes" + std::to_string(bits / 8);
  case TypeKind::Tuple:
    return "tuple";
  }
  return "?";
}

bool SolType::operator==(const SolType& other) const
{
  if (kind != other.kind)
    return false;
  switch (kind) {
  case TypeKind::Uint:
  case TypeKind::Int:
  case TypeKind::FixedBytes:
    return bits == other.bits;
  case TypeKind::Enum:
  case TypeKind::Contract:
    return name == other.name;
  case TypeKind::Mapping:
    return *key == *other.key && *elem == *other.elem;
  case TypeKind::StaticArray:
    return length == other.length && *elem == *other.elem;
  case TypeKind::DynamicArray:
    return *elem == *other.elem;
  default:
    return true;
  }
}

ExprPtr make_expr(ExprKind kind, SourceSpan span, std::string text, std::vector<ExprPtr> args)
{
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->span = span;
  e->text = std::move(text);
  e->args = std::move(args);
  return e;
}

StmtPtr make_stmt(StmtKind kind, SourceSpan span)
{
  auto s = std::make_shared<Stmt>();
  s->kind = kind;
  s->span = span;
  return s;
}

StmtPtr make_block(SourceSpan span, std::vector<StmtPtr> stmts)
{
  auto s = make_stmt(StmtKind::Block, span);
  s->stmts = std::move(stmts);
  return s;
}

namespace {
template <typename T>
const T* find_named(const std::vector<T>& items, std::string_view name)
{
  auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.name == name; });
  return it == items.end() ? nullptr : &*it;
}
} // namespace

const FunDecl* ContractAst::find_function(std::string_view n) const { return find_named(functions, n); }
const EventDecl* ContractAst::find_event(std::string_view n) const { return find_named(events, n); }
const VarDecl* ContractAst::find_state_var(std::string_view n) const { return find_named(stateVars, n); }
const EnumDecl* ContractAst::find_enum(std::string_view n) const { return find_named(enums, n); }

std::vector<const FunDecl*> ContractAst::public_functions() const
{
  std::vector<const FunDecl*> out;
  for (const auto& f : functions) {
    if (f.is_public() && f.body)
      out.push_back(&f);
  }
  return out;
}

} // namespace solbmc::frontend
