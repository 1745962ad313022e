#pragma once

#include "solbmc/diagnostics.hpp"
#include "solbmc/word.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace solbmc::frontend {

enum class TypeKind {
  Void,
  Uint,
  Int,
  Bool,
  Address,
  Enum,
  Contract, // a contract or interface used as a type
  Mapping,
  StaticArray,
  DynamicArray,
  String,
  Bytes,
  FixedBytes,
  Tuple, // multiple return values, only ever on calls
};

struct SolType;
using TypePtr = std::shared_ptr<const SolType>;

struct SolType {
  TypeKind kind = TypeKind::Void;
  unsigned bits = 256;  // declared width of uintN/intN/bytesN
  std::string name;     // enum or contract name
  TypePtr key;          // mapping key
  TypePtr elem;         // mapping value / array element
  std::uint64_t length = 0;

  static SolType uint(unsigned bits = 256) { return {TypeKind::Uint, bits, {}, {}, {}, 0}; }
  static SolType boolean() { return {TypeKind::Bool, 0, {}, {}, {}, 0}; }
  static SolType address() { return {TypeKind::Address, 0, {}, {}, {}, 0}; }
  static SolType void_type() { return {}; }
  static SolType enumeration(std::string name) { return {TypeKind::Enum, 0, std::move(name), {}, {}, 0}; }
  static SolType mapping(SolType key, SolType value);
  static SolType static_array(SolType elem, std::uint64_t length);

  bool is_scalar() const
  {
    return kind == TypeKind::Uint || kind == TypeKind::Bool || kind == TypeKind::Address ||
           kind == TypeKind::Enum;
  }
  bool is_numeric() const { return kind == TypeKind::Uint || kind == TypeKind::Enum; }
  bool is_void() const { return kind == TypeKind::Void; }

  std::string str() const;
  bool operator==(const SolType& other) const;
};

// ---------------------------------------------------------------------------
// Expressions

enum class ExprKind {
  Number,
  BoolLit,
  StringLit,
  Ident,
  Member,   // args[0].text
  Index,    // args[0][args[1]]
  Call,     // args[0](args[1..])
  TypeConv, // convType(args[0])
  Unary,    // text is the operator; `postfix` marks x++ / x--
  Binary,
  Assign,   // text is "=", "+=", ...
  Ternary,
  New,      // new convType(args...)
};

/// What an identifier or member access was resolved to by the type checker.
enum class RefKind {
  None,
  Local,
  Param,
  StateVar,
  Function,
  Event,
  EnumType,
  EnumValue,
  MsgSender,
  MsgValue,
  Now, // `now` and `block.timestamp`
  This,
  Balance, // <address>.balance
  Builtin, // require/assert/... see Builtin
  Namespace, // msg, block, tx
  Unsupported,
};

enum class Builtin {
  None,
  Require,
  Assert,
  Revert,
  Transfer,
  Send,
  Selfdestruct,
  AddMod,
  MulMod,
  ExternalCall, // call/delegatecall/callcode or a method on a contract value
  Hash,         // keccak256 / sha3 / sha256 / ripemd160 / ecrecover
  Push,
  Length,
};

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::Number;
  SourceSpan span;
  std::string text;
  std::vector<ExprPtr> args;
  Word value = 0;           // Number, after unit scaling
  std::string unit;         // Number: ether, seconds, ...
  bool postfix = false;     // Unary ++/--
  SolType convType;         // TypeConv / New

  // Filled in by the type checker.
  SolType type;
  RefKind ref = RefKind::None;
  Builtin builtin = Builtin::None;
  std::string target; // resolved declaration name (function, event, state var)
  bool lvalue = false;
};

ExprPtr make_expr(ExprKind kind, SourceSpan span, std::string text = {}, std::vector<ExprPtr> args = {});

// ---------------------------------------------------------------------------
// Statements

enum class StmtKind {
  Block,
  VarDecl,
  Expr,
  If,
  For,
  While,
  DoWhile,
  Return,
  Emit,
  Throw,
  Break,
  Continue,
};

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Stmt {
  StmtKind kind = StmtKind::Block;
  SourceSpan span;
  std::vector<StmtPtr> stmts; // Block
  // VarDecl
  std::string name;
  SolType declType;
  bool isVar = false; // declared with `var`
  // Expr / Return / Emit value, VarDecl initializer, loop & if condition
  ExprPtr expr;
  StmtPtr then;   // If / loop body
  StmtPtr els;    // If
  StmtPtr init;   // For
  ExprPtr post;   // For
};

StmtPtr make_stmt(StmtKind kind, SourceSpan span);
StmtPtr make_block(SourceSpan span, std::vector<StmtPtr> stmts);

// ---------------------------------------------------------------------------
// Declarations

enum class Visibility { Public, External, Internal, Private };

struct Param {
  std::string name;
  SolType type;
  SourceSpan span;
};

struct FunDecl {
  std::string name;
  std::vector<Param> params;
  std::vector<Param> returns;
  Visibility visibility = Visibility::Public;
  bool payable = false;
  bool isConstructor = false;
  std::vector<std::string> modifiers;
  StmtPtr body; // null for declarations without a body
  SourceSpan span;

  bool is_public() const { return visibility == Visibility::Public || visibility == Visibility::External; }
  std::optional<SolType> return_type() const
  {
    if (returns.empty())
      return std::nullopt;
    return returns.front().type;
  }
};

struct VarDecl {
  std::string name;
  SolType type;
  ExprPtr initializer;
  bool isConstant = false;
  SourceSpan span;
};

struct EventDecl {
  std::string name;
  std::vector<Param> params;
  SourceSpan span;
};

struct EnumDecl {
  std::string name;
  std::vector<std::string> members;
  SourceSpan span;
};

/// Any contract-like definition other than the modeled contract.
struct OtherDefinition {
  enum class Kind { Contract, Interface, Library } kind = Kind::Contract;
  std::string name;
  SourceSpan span;
};

struct ContractAst {
  std::string name;
  std::vector<std::string> bases;
  std::vector<EnumDecl> enums;
  std::vector<VarDecl> stateVars;
  std::vector<EventDecl> events;  // own events followed by inherited interface events
  std::vector<FunDecl> functions; // constructor excluded
  std::optional<FunDecl> ctor;
  std::vector<OtherDefinition> others;
  SourceSpan span;

  const FunDecl* find_function(std::string_view name) const;
  const EventDecl* find_event(std::string_view name) const;
  const VarDecl* find_state_var(std::string_view name) const;
  const EnumDecl* find_enum(std::string_view name) const;
  std::vector<const FunDecl*> public_functions() const;
};

} // namespace solbmc::frontend
