#include "solbmc/frontend.hpp"

#include <map>
#include <set>

namespace solbmc::frontend {

namespace {

bool same_scalar(const SolType& a, const SolType& b)
{
  return a == b || (a.kind == TypeKind::Uint && b.kind == TypeKind::Uint);
}

class TypeChecker {
public:
  explicit TypeChecker(ContractAst& ast) : ast_(ast)
  {
    contractNames_.insert(ast.name);
    for (const auto& o : ast.others)
      contractNames_.insert(o.name);
  }

  std::vector<Diagnostic> run()
  {
    std::set<std::string> seen;
    auto declare = [&](const std::string& name, SourceSpan span) {
      if (!seen.insert(name).second)
        error(span, "duplicate declaration of '" + name + "'");
    };
    for (auto& en : ast_.enums)
      declare(en.name, en.span);
    for (auto& v : ast_.stateVars) {
      declare(v.name, v.span);
      v.type = resolve_type(v.type, v.span);
      check_storage_type(v.type, v.span);
    }
    for (auto& ev : ast_.events) {
      for (auto& p : ev.params)
        p.type = resolve_type(p.type, p.span);
    }
    for (auto& f : ast_.functions) {
      declare(f.name, f.span);
      resolve_signature(f);
    }
    if (ast_.ctor)
      resolve_signature(*ast_.ctor);

    for (auto& v : ast_.stateVars) {
      if (!v.initializer)
        continue;
      current_ = nullptr;
      locals_.clear();
      check_expr(*v.initializer);
      expect_assignable(v.type, *v.initializer, v.initializer->span);
    }
    for (auto& f : ast_.functions)
      check_function(f);
    if (ast_.ctor)
      check_function(*ast_.ctor);
    return std::move(diags_);
  }

private:
  void error(SourceSpan span, std::string msg)
  {
    diags_.push_back(Diagnostic{DiagKind::TypeError, 0, std::move(msg), span});
  }

  SolType resolve_type(const SolType& t, SourceSpan span)
  {
    switch (t.kind) {
    case TypeKind::Enum: {
      if (ast_.find_enum(t.name))
        return t;
      if (contractNames_.count(t.name)) {
        SolType c = t;
        c.kind = TypeKind::Contract;
        return c;
      }
      error(span, "unknown type '" + t.name + "'");
      return SolType::uint();
    }
    case TypeKind::Mapping:
      return SolType::mapping(resolve_type(*t.key, span), resolve_type(*t.elem, span));
    case TypeKind::StaticArray:
      return SolType::static_array(resolve_type(*t.elem, span), t.length);
    case TypeKind::DynamicArray: {
      SolType d = t;
      d.elem = std::make_shared<const SolType>(resolve_type(*t.elem, span));
      return d;
    }
    case TypeKind::Int:
      error(span, "signed integers are not supported");
      return t;
    default:
      return t;
    }
  }

  void check_storage_type(const SolType& t, SourceSpan span)
  {
    // Composite shapes the model can't flatten are subset violations reported
    // by the validator; only check what the validator doesn't cover.
    if (t.kind == TypeKind::Mapping)
      check_storage_type(*t.elem, span);
    if (t.kind == TypeKind::StaticArray)
      check_storage_type(*t.elem, span);
  }

  void resolve_signature(FunDecl& f)
  {
    for (auto& p : f.params)
      p.type = resolve_type(p.type, p.span);
    for (auto& p : f.returns)
      p.type = resolve_type(p.type, p.span);
    if (!f.modifiers.empty())
      error(f.span, "function modifiers are not supported ('" + f.modifiers.front() + "')");
    if (f.returns.size() > 1)
      error(f.span, "multiple return values are not supported");
  }

  void check_function(FunDecl& f)
  {
    current_ = &f;
    locals_.clear();
    for (const auto& p : f.params) {
      if (!p.name.empty())
        locals_[p.name] = {p.type, RefKind::Param};
      if (!p.type.is_scalar() && p.type.kind != TypeKind::String && p.type.kind != TypeKind::Bytes &&
          p.type.kind != TypeKind::DynamicArray)
        error(p.span, "parameter type '" + p.type.str() + "' is not supported");
    }
    for (const auto& p : f.returns) {
      if (!p.name.empty())
        error(p.span, "named return values are not supported");
    }
    if (f.body)
      check_stmt(*f.body);
    current_ = nullptr;
  }

  // ---- statements --------------------------------------------------------
  void check_stmt(Stmt& s)
  {
    switch (s.kind) {
    case StmtKind::Block:
      for (auto& c : s.stmts)
        check_stmt(*c);
      break;
    case StmtKind::VarDecl: {
      if (s.expr)
        check_expr(*s.expr);
      SolType t = s.declType;
      if (s.isVar) {
        t = s.expr ? s.expr->type : SolType::uint();
      } else {
        t = resolve_type(t, s.span);
        s.declType = t;
        if (t.kind == TypeKind::Mapping || t.kind == TypeKind::StaticArray)
          error(s.span, "local variables of type '" + t.str() + "' are not supported");
        if (s.expr)
          expect_assignable(t, *s.expr, s.expr->span);
      }
      if (locals_.count(s.name) && locals_[s.name].second == RefKind::Param)
        error(s.span, "declaration of '" + s.name + "' shadows a parameter");
      locals_[s.name] = {t, RefKind::Local};
      break;
    }
    case StmtKind::Expr:
      check_expr(*s.expr, /*statementLevel=*/true);
      break;
    case StmtKind::If:
      check_condition(*s.expr);
      check_stmt(*s.then);
      if (s.els)
        check_stmt(*s.els);
      break;
    case StmtKind::For:
      if (s.init)
        check_stmt(*s.init);
      if (s.expr)
        check_condition(*s.expr);
      if (s.post)
        check_expr(*s.post, true);
      check_stmt(*s.then);
      break;
    case StmtKind::While:
    case StmtKind::DoWhile:
      check_condition(*s.expr);
      check_stmt(*s.then);
      break;
    case StmtKind::Return:
      if (s.expr) {
        check_expr(*s.expr);
        auto rt = current_ ? current_->return_type() : std::nullopt;
        if (!rt)
          error(s.span, "function has no return type");
        else
          expect_assignable(*rt, *s.expr, s.expr->span);
      }
      break;
    case StmtKind::Emit: {
      Expr& call = *s.expr;
      Expr& callee = *call.args[0];
      if (callee.kind != ExprKind::Ident || !ast_.find_event(callee.text)) {
        error(call.span, "emit of undeclared event");
        for (std::size_t i = 1; i < call.args.size(); ++i)
          check_expr(*call.args[i]);
        break;
      }
      check_expr(call, /*statementLevel=*/true);
      break;
    }
    case StmtKind::Throw:
    case StmtKind::Break:
    case StmtKind::Continue:
      break;
    }
  }

  void check_condition(Expr& e)
  {
    check_expr(e);
    if (e.type.kind != TypeKind::Bool)
      error(e.span, "condition must be bool, found " + e.type.str());
  }

  void expect_assignable(const SolType& target, const Expr& value, SourceSpan span)
  {
    if (target.kind == TypeKind::Void || value.type.kind == TypeKind::Void)
      return;
    if (same_scalar(target, value.type))
      return;
    if ((target.kind == TypeKind::String || target.kind == TypeKind::Bytes) && value.kind == ExprKind::StringLit)
      return;
    if (target == value.type)
      return;
    error(span, "cannot assign " + value.type.str() + " to " + target.str());
  }

  // ---- expressions -------------------------------------------------------
  void check_expr(Expr& e, bool statementLevel = false)
  {
    switch (e.kind) {
    case ExprKind::Number:
      // 20-byte hex literals are address literals
      e.type = e.text.size() == 42 && e.text.rfind("0x", 0) == 0 ? SolType::address() : SolType::uint();
      break;
    case ExprKind::BoolLit:
      e.type = SolType::boolean();
      break;
    case ExprKind::StringLit:
      e.type = {TypeKind::String, 0, {}, {}, {}, 0};
      break;
    case ExprKind::Ident:
      check_ident(e);
      break;
    case ExprKind::Member:
      check_member(e);
      break;
    case ExprKind::Index:
      check_index(e);
      break;
    case ExprKind::Call:
      check_call(e, statementLevel);
      break;
    case ExprKind::TypeConv:
      check_conversion(e);
      break;
    case ExprKind::Unary:
      check_unary(e, statementLevel);
      break;
    case ExprKind::Binary:
      check_binary(e);
      break;
    case ExprKind::Assign:
      check_assign(e, statementLevel);
      break;
    case ExprKind::Ternary:
      check_condition(*e.args[0]);
      check_expr(*e.args[1]);
      check_expr(*e.args[2]);
      if (!same_scalar(e.args[1]->type, e.args[2]->type))
        error(e.span, "ternary branches have different types");
      e.type = e.args[1]->type;
      break;
    case ExprKind::New:
      for (auto& a : e.args)
        check_expr(*a);
      e.type = resolve_type(e.convType, e.span);
      e.convType = e.type;
      break;
    }
  }

  void check_ident(Expr& e)
  {
    const std::string& n = e.text;
    if (auto it = locals_.find(n); it != locals_.end()) {
      e.type = it->second.first;
      e.ref = it->second.second;
      e.lvalue = true;
      return;
    }
    if (const VarDecl* v = ast_.find_state_var(n)) {
      e.type = v->type;
      e.ref = RefKind::StateVar;
      e.target = n;
      e.lvalue = !v->isConstant;
      return;
    }
    if (ast_.find_function(n)) {
      e.ref = RefKind::Function;
      e.target = n;
      return;
    }
    if (ast_.find_event(n)) {
      e.ref = RefKind::Event;
      e.target = n;
      return;
    }
    if (ast_.find_enum(n)) {
      e.ref = RefKind::EnumType;
      e.target = n;
      return;
    }
    if (n == "now") {
      e.ref = RefKind::Now;
      e.type = SolType::uint();
      return;
    }
    if (n == "this") {
      e.ref = RefKind::This;
      e.type = SolType::address();
      return;
    }
    if (n == "msg" || n == "block" || n == "tx") {
      e.ref = RefKind::Namespace;
      return;
    }
    static const std::map<std::string, Builtin, std::less<>> builtins = {
        {"require", Builtin::Require},       {"assert", Builtin::Assert},  {"revert", Builtin::Revert},
        {"selfdestruct", Builtin::Selfdestruct}, {"suicide", Builtin::Selfdestruct},
        {"addmod", Builtin::AddMod},         {"mulmod", Builtin::MulMod},  {"keccak256", Builtin::Hash},
        {"sha3", Builtin::Hash},             {"sha256", Builtin::Hash},    {"ripemd160", Builtin::Hash},
        {"ecrecover", Builtin::Hash},
    };
    if (auto it = builtins.find(n); it != builtins.end()) {
      e.ref = RefKind::Builtin;
      e.builtin = it->second;
      return;
    }
    if (contractNames_.count(n)) {
      e.ref = RefKind::Unsupported;
      return;
    }
    error(e.span, "unknown identifier '" + n + "'");
    e.type = SolType::uint();
  }

  void check_member(Expr& e)
  {
    Expr& obj = *e.args[0];
    check_expr(obj);
    const std::string& m = e.text;
    if (obj.ref == RefKind::Namespace) {
      if (obj.text == "msg" && m == "sender") {
        e.ref = RefKind::MsgSender;
        e.type = SolType::address();
      } else if (obj.text == "msg" && m == "value") {
        e.ref = RefKind::MsgValue;
        e.type = SolType::uint();
      } else if (obj.text == "block" && m == "timestamp") {
        e.ref = RefKind::Now;
        e.type = SolType::uint();
      } else {
        error(e.span, "'" + obj.text + "." + m + "' is not supported");
        e.ref = RefKind::Unsupported;
        e.type = SolType::uint();
      }
      return;
    }
    if (obj.ref == RefKind::EnumType) {
      const EnumDecl* en = ast_.find_enum(obj.target);
      auto it = std::find(en->members.begin(), en->members.end(), m);
      if (it == en->members.end()) {
        error(e.span, "enum '" + en->name + "' has no member '" + m + "'");
      } else {
        e.value = Word(static_cast<unsigned>(it - en->members.begin()));
      }
      e.ref = RefKind::EnumValue;
      e.type = SolType::enumeration(en->name);
      return;
    }
    const SolType& t = obj.type;
    if (t.kind == TypeKind::Address) {
      if (m == "balance") {
        e.ref = RefKind::Balance;
        e.type = SolType::uint();
      } else if (m == "transfer") {
        e.ref = RefKind::Builtin;
        e.builtin = Builtin::Transfer;
      } else if (m == "send") {
        e.ref = RefKind::Builtin;
        e.builtin = Builtin::Send;
      } else {
        // call, delegatecall, callcode or a method of `this`
        e.ref = RefKind::Builtin;
        e.builtin = Builtin::ExternalCall;
      }
      return;
    }
    if (t.kind == TypeKind::Contract) {
      e.ref = RefKind::Builtin;
      e.builtin = Builtin::ExternalCall;
      return;
    }
    if (t.kind == TypeKind::DynamicArray || t.kind == TypeKind::StaticArray || t.kind == TypeKind::Bytes ||
        t.kind == TypeKind::String) {
      if (m == "length") {
        e.ref = RefKind::Builtin;
        e.builtin = Builtin::Length;
        e.type = SolType::uint();
        e.lvalue = t.kind == TypeKind::DynamicArray;
        return;
      }
      if (m == "push") {
        e.ref = RefKind::Builtin;
        e.builtin = Builtin::Push;
        return;
      }
    }
    error(e.span, "type " + t.str() + " has no member '" + m + "'");
    e.type = SolType::uint();
  }

  void check_index(Expr& e)
  {
    Expr& base = *e.args[0];
    Expr& idx = *e.args[1];
    check_expr(base);
    check_expr(idx);
    const SolType& t = base.type;
    e.lvalue = base.lvalue;
    switch (t.kind) {
    case TypeKind::Mapping:
      if (!same_scalar(*t.key, idx.type) && t.key->kind != TypeKind::String)
        error(idx.span, "mapping key must be " + t.key->str() + ", found " + idx.type.str());
      e.type = *t.elem;
      return;
    case TypeKind::StaticArray:
    case TypeKind::DynamicArray:
      if (idx.type.kind != TypeKind::Uint)
        error(idx.span, "array index must be uint");
      e.type = *t.elem;
      return;
    case TypeKind::Bytes:
    case TypeKind::String:
    case TypeKind::FixedBytes:
      e.type = {TypeKind::FixedBytes, 8, {}, {}, {}, 0};
      return;
    default:
      error(e.span, "type " + t.str() + " is not indexable");
      e.type = SolType::uint();
    }
  }

  void check_args(Expr& e)
  {
    for (std::size_t i = 1; i < e.args.size(); ++i)
      check_expr(*e.args[i]);
  }

  void check_call(Expr& e, bool statementLevel)
  {
    Expr& callee = *e.args[0];
    check_expr(callee);
    check_args(e);
    std::size_t argc = e.args.size() - 1;
    auto arg = [&](std::size_t i) -> Expr& { return *e.args[i + 1]; };

    if (callee.ref == RefKind::Builtin) {
      e.builtin = callee.builtin;
      e.ref = RefKind::Builtin;
      switch (callee.builtin) {
      case Builtin::Require:
      case Builtin::Assert:
        if (argc < 1 || argc > (callee.builtin == Builtin::Require ? 2u : 1u)) {
          error(e.span, "wrong number of arguments");
        } else {
          if (arg(0).type.kind != TypeKind::Bool)
            error(arg(0).span, "condition must be bool");
          if (argc == 2 && arg(1).kind != ExprKind::StringLit)
            error(arg(1).span, "reason must be a string literal");
        }
        e.type = SolType::void_type();
        break;
      case Builtin::Revert:
        if (argc > 1 || (argc == 1 && arg(0).kind != ExprKind::StringLit))
          error(e.span, "revert takes an optional string literal");
        e.type = SolType::void_type();
        break;
      case Builtin::Transfer:
        if (argc != 1 || arg(0).type.kind != TypeKind::Uint)
          error(e.span, "transfer expects one uint amount");
        e.type = SolType::void_type();
        break;
      case Builtin::Send:
        e.type = SolType::boolean();
        break;
      case Builtin::Selfdestruct:
        if (argc != 1 || arg(0).type.kind != TypeKind::Address)
          error(e.span, "selfdestruct expects an address");
        e.type = SolType::void_type();
        break;
      case Builtin::AddMod:
      case Builtin::MulMod:
        if (argc != 3)
          error(e.span, "expected three arguments");
        for (std::size_t i = 0; i < argc; ++i) {
          if (arg(i).type.kind != TypeKind::Uint)
            error(arg(i).span, "expected uint argument");
        }
        e.type = SolType::uint();
        break;
      case Builtin::ExternalCall:
        e.type = SolType::boolean();
        break;
      case Builtin::Hash:
        e.type = {TypeKind::FixedBytes, 256, {}, {}, {}, 0};
        break;
      case Builtin::Push:
        e.type = SolType::uint();
        break;
      default:
        e.type = SolType::void_type();
      }
      if (!statementLevel && e.type.is_void())
        error(e.span, "call has no value");
      return;
    }
    if (callee.ref == RefKind::Function) {
      const FunDecl* f = ast_.find_function(callee.target);
      e.ref = RefKind::Function;
      e.target = f->name;
      if (f->params.size() != argc) {
        error(e.span, "'" + f->name + "' expects " + std::to_string(f->params.size()) + " arguments");
      } else {
        for (std::size_t i = 0; i < argc; ++i)
          expect_assignable(f->params[i].type, arg(i), arg(i).span);
      }
      e.type = f->return_type().value_or(SolType::void_type());
      if (!statementLevel && e.type.is_void())
        error(e.span, "'" + f->name + "' returns no value");
      return;
    }
    if (callee.ref == RefKind::Event) {
      const EventDecl* ev = ast_.find_event(callee.target);
      e.ref = RefKind::Event;
      e.target = ev->name;
      if (ev->params.size() != argc) {
        error(e.span, "event '" + ev->name + "' expects " + std::to_string(ev->params.size()) + " arguments");
      } else {
        for (std::size_t i = 0; i < argc; ++i)
          expect_assignable(ev->params[i].type, arg(i), arg(i).span);
      }
      e.type = SolType::void_type();
      if (!statementLevel)
        error(e.span, "event invocation used as a value");
      return;
    }
    if (callee.ref == RefKind::EnumType) {
      // explicit conversion to an enum
      if (argc != 1 || arg(0).type.kind != TypeKind::Uint)
        error(e.span, "enum conversion expects one uint");
      e.ref = RefKind::EnumType;
      e.target = callee.target;
      e.type = SolType::enumeration(callee.target);
      return;
    }
    if (callee.ref == RefKind::Unsupported) {
      // conversion to a contract type, e.g. Token(addr)
      e.ref = RefKind::Unsupported;
      e.type = {TypeKind::Contract, 0, callee.text, {}, {}, 0};
      return;
    }
    error(e.span, "expression is not callable");
    e.type = SolType::uint();
  }

  void check_conversion(Expr& e)
  {
    Expr& x = *e.args[0];
    check_expr(x);
    const SolType& to = e.convType;
    e.type = to;
    switch (to.kind) {
    case TypeKind::Address:
      if (x.type.kind != TypeKind::Uint && x.type.kind != TypeKind::Address && x.type.kind != TypeKind::Contract)
        error(e.span, "cannot convert " + x.type.str() + " to address");
      break;
    case TypeKind::Uint:
      if (x.type.kind != TypeKind::Uint && x.type.kind != TypeKind::Enum && x.type.kind != TypeKind::Address &&
          x.type.kind != TypeKind::FixedBytes)
        error(e.span, "cannot convert " + x.type.str() + " to " + to.str());
      break;
    case TypeKind::Int:
      error(e.span, "signed integers are not supported");
      break;
    case TypeKind::Bool:
      error(e.span, "conversion to bool is not allowed");
      break;
    default:
      break; // string/bytes conversions are subset violations
    }
  }

  void check_unary(Expr& e, bool statementLevel)
  {
    Expr& x = *e.args[0];
    check_expr(x);
    const std::string& op = e.text;
    if (op == "!") {
      if (x.type.kind != TypeKind::Bool)
        error(e.span, "operator ! expects bool");
      e.type = SolType::boolean();
    } else if (op == "delete") {
      if (!x.lvalue)
        error(e.span, "delete expects an assignable expression");
      if (!statementLevel)
        error(e.span, "delete is only supported as a statement");
      e.type = SolType::void_type();
    } else if (op == "++" || op == "--") {
      if (!x.lvalue || x.type.kind != TypeKind::Uint)
        error(e.span, "operator " + op + " expects an assignable uint");
      if (!statementLevel)
        error(e.span, "increment and decrement are only supported as statements");
      e.type = SolType::uint();
    } else {
      // unary - and ~
      if (x.type.kind != TypeKind::Uint)
        error(e.span, "operator " + op + " expects uint");
      e.type = SolType::uint();
    }
  }

  void check_binary(Expr& e)
  {
    Expr& l = *e.args[0];
    Expr& r = *e.args[1];
    check_expr(l);
    check_expr(r);
    const std::string& op = e.text;
    if (op == "&&" || op == "||") {
      if (l.type.kind != TypeKind::Bool || r.type.kind != TypeKind::Bool)
        error(e.span, "operator " + op + " expects bool operands");
      e.type = SolType::boolean();
    } else if (op == "==" || op == "!=") {
      if (!same_scalar(l.type, r.type) || !l.type.is_scalar())
        error(e.span, "cannot compare " + l.type.str() + " with " + r.type.str());
      e.type = SolType::boolean();
    } else if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      if (!same_scalar(l.type, r.type) || !l.type.is_numeric())
        error(e.span, "cannot order " + l.type.str() + " and " + r.type.str());
      e.type = SolType::boolean();
    } else {
      if (op == "**")
        error(e.span, "exponentiation is not supported");
      if (l.type.kind != TypeKind::Uint || r.type.kind != TypeKind::Uint)
        error(e.span, "operator " + op + " expects uint operands");
      e.type = SolType::uint();
    }
  }

  void check_assign(Expr& e, bool statementLevel)
  {
    Expr& l = *e.args[0];
    Expr& r = *e.args[1];
    check_expr(l);
    check_expr(r);
    if (!statementLevel)
      error(e.span, "assignment is only supported as a statement");
    if (!l.lvalue)
      error(l.span, "expression is not assignable");
    if (e.text == "=") {
      if (!l.type.is_scalar() && l.type.kind != TypeKind::String && l.type.kind != TypeKind::Bytes &&
          l.type.kind != TypeKind::Contract && l.type.kind != TypeKind::DynamicArray)
        error(e.span, "assignment to " + l.type.str() + " is not supported");
      expect_assignable(l.type, r, r.span);
    } else if (l.type.kind != TypeKind::Uint || r.type.kind != TypeKind::Uint) {
      error(e.span, "compound assignment expects uint operands");
    }
    e.type = l.type;
  }

  ContractAst& ast_;
  std::set<std::string> contractNames_;
  std::vector<Diagnostic> diags_;
  const FunDecl* current_ = nullptr;
  std::map<std::string, std::pair<SolType, RefKind>> locals_;
};

} // namespace

std::vector<Diagnostic> typecheck(ContractAst& ast)
{
  return TypeChecker(ast).run();
}

} // namespace solbmc::frontend
