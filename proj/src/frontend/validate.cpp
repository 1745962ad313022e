#include "solbmc/frontend.hpp"

#include <functional>
#include <map>
#include <set>

namespace solbmc::frontend {

namespace {

bool is_bitwise(const std::string& op)
{
  static const std::set<std::string, std::less<>> ops = {"&", "|", "^", "<<", ">>", "~", "&=", "|=", "^=", "<<=", ">>="};
  return ops.count(op) > 0;
}

class SubsetValidator {
public:
  explicit SubsetValidator(const ContractAst& ast) : ast_(ast) {}

  std::vector<Diagnostic> run()
  {
    for (const auto& o : ast_.others) {
      if (o.kind == OtherDefinition::Kind::Interface)
        continue;
      violation(5, o.span,
                std::string(o.kind == OtherDefinition::Kind::Library ? "library" : "contract") + " '" + o.name +
                    "' is defined; only one contract is allowed");
    }
    for (const auto& ev : ast_.events) {
      if (ev.params.size() > 4)
        violation(6, ev.span,
                  "event '" + ev.name + "' has " + std::to_string(ev.params.size()) + " parameters (at most 4)");
      for (const auto& p : ev.params)
        check_type(p.type, p.span, /*storage=*/false);
    }
    for (const auto& v : ast_.stateVars) {
      check_type(v.type, v.span, /*storage=*/true);
      if (v.initializer)
        check_expr(*v.initializer, nullptr);
    }
    auto check_fn = [&](const FunDecl& f) {
      for (const auto& p : f.params)
        check_type(p.type, p.span, false);
      for (const auto& p : f.returns)
        check_type(p.type, p.span, false);
      if (f.body)
        check_stmt(*f.body);
    };
    for (const auto& f : ast_.functions)
      check_fn(f);
    if (ast_.ctor)
      check_fn(*ast_.ctor);
    check_recursion();
    return std::move(diags_);
  }

private:
  void violation(int rule, SourceSpan span, std::string msg)
  {
    diags_.push_back(Diagnostic{DiagKind::SubsetViolation, rule, std::move(msg), span});
  }

  void check_type(const SolType& t, SourceSpan span, bool storage)
  {
    switch (t.kind) {
    case TypeKind::Mapping:
      if (t.key->kind != TypeKind::Address)
        violation(2, span, "mapping keyed by " + t.key->str() + " is unbounded storage; only address keys are allowed");
      check_type(*t.elem, span, storage);
      break;
    case TypeKind::StaticArray:
      check_type(*t.elem, span, storage);
      break;
    case TypeKind::DynamicArray:
      violation(3, span, "dynamic array type '" + t.str() + "'; only static arrays are allowed");
      break;
    case TypeKind::String:
    case TypeKind::Bytes:
    case TypeKind::FixedBytes:
      violation(9, span, "type '" + t.str() + "' is not supported");
      break;
    case TypeKind::Contract:
      violation(8, span, "contract-typed value '" + t.str() + "' enables calls to other contracts");
      break;
    default:
      break;
    }
  }

  void check_stmt(const Stmt& s)
  {
    switch (s.kind) {
    case StmtKind::Block:
      for (const auto& c : s.stmts)
        check_stmt(*c);
      break;
    case StmtKind::VarDecl:
      if (s.isVar)
        violation(4, s.span, "'var' declarations are forbidden");
      else
        check_type(s.declType, s.span, false);
      if (s.expr)
        check_expr(*s.expr, nullptr);
      break;
    case StmtKind::For:
    case StmtKind::While:
    case StmtKind::DoWhile:
      violation(1, s.span, "loops are forbidden");
      if (s.init)
        check_stmt(*s.init);
      if (s.expr)
        check_expr(*s.expr, nullptr);
      if (s.post)
        check_expr(*s.post, nullptr);
      check_stmt(*s.then);
      break;
    case StmtKind::If:
      check_expr(*s.expr, nullptr);
      check_stmt(*s.then);
      if (s.els)
        check_stmt(*s.els);
      break;
    case StmtKind::Expr:
    case StmtKind::Return:
    case StmtKind::Emit:
      if (s.expr)
        check_expr(*s.expr, nullptr);
      break;
    default:
      break;
    }
  }

  void check_expr(const Expr& e, const Expr* parent)
  {
    switch (e.kind) {
    case ExprKind::Number:
      if (e.type.kind == TypeKind::Address)
        violation(7, e.span, "address literal; addresses range over a finite symbolic domain");
      break;
    case ExprKind::StringLit: {
      bool message = parent && parent->kind == ExprKind::Call &&
                     (parent->builtin == Builtin::Require || parent->builtin == Builtin::Revert) &&
                     parent->args.back().get() == &e && parent->args.size() > 1 &&
                     (parent->builtin == Builtin::Revert || parent->args.size() == 3);
      if (!message)
        violation(9, e.span, "string literals are not supported");
      break;
    }
    case ExprKind::Member:
      if (e.builtin == Builtin::Push && e.args[0]->type.kind != TypeKind::DynamicArray)
        violation(2, e.span, "push is dynamic memory management");
      break;
    case ExprKind::Call:
      switch (e.builtin) {
      case Builtin::ExternalCall:
        violation(8, e.span, "calls to other contracts are forbidden");
        break;
      case Builtin::Send:
        violation(8, e.span, "'send' invokes code of another account");
        break;
      case Builtin::Push:
        violation(2, e.span, "push is dynamic memory management");
        break;
      case Builtin::Hash:
        violation(9, e.span, "hash functions operate on bytes and are not supported");
        break;
      default:
        break;
      }
      if (e.ref == RefKind::Unsupported)
        violation(8, e.span, "conversion to a contract type");
      break;
    case ExprKind::TypeConv: {
      const Expr& x = *e.args[0];
      if (e.convType.kind == TypeKind::Address) {
        bool zero = x.kind == ExprKind::Number && x.value == 0;
        bool self = x.kind == ExprKind::Ident && x.ref == RefKind::This;
        if (!zero && !self && x.type.kind != TypeKind::Address)
          violation(7, e.span, "conversion to address from a non-address value");
      } else if (e.convType.kind == TypeKind::Uint && x.type.kind == TypeKind::Address) {
        violation(7, e.span, "conversion of an address to an integer");
      } else if (e.convType.kind == TypeKind::String || e.convType.kind == TypeKind::Bytes ||
                 e.convType.kind == TypeKind::FixedBytes) {
        violation(9, e.span, "conversion to '" + e.convType.str() + "'");
      }
      break;
    }
    case ExprKind::Unary:
    case ExprKind::Binary:
    case ExprKind::Assign:
      if (is_bitwise(e.text))
        violation(9, e.span, "bitwise operator '" + e.text + "'");
      if (e.kind == ExprKind::Binary && (e.args[0]->type.kind == TypeKind::String || e.args[0]->type.kind == TypeKind::Bytes))
        violation(9, e.span, "string operations are not supported");
      break;
    case ExprKind::Index:
      if (e.args[0]->type.kind == TypeKind::String || e.args[0]->type.kind == TypeKind::Bytes ||
          e.args[0]->type.kind == TypeKind::FixedBytes)
        violation(9, e.span, "indexing into bytes is not supported");
      break;
    case ExprKind::New:
      if (e.convType.kind == TypeKind::Contract || e.convType.kind == TypeKind::Enum)
        violation(8, e.span, "dynamic contract creation is forbidden");
      else
        violation(2, e.span, "'new' allocates dynamic memory");
      break;
    default:
      break;
    }
    for (const auto& a : e.args)
      check_expr(*a, &e);
  }

  static void collect_calls(const Stmt* s, std::set<std::string>& out)
  {
    if (!s)
      return;
    std::function<void(const Expr&)> walk = [&](const Expr& e) {
      if (e.kind == ExprKind::Call && e.ref == RefKind::Function)
        out.insert(e.target);
      for (const auto& a : e.args)
        walk(*a);
    };
    if (s->expr)
      walk(*s->expr);
    if (s->post)
      walk(*s->post);
    for (const auto& c : s->stmts)
      collect_calls(c.get(), out);
    collect_calls(s->then.get(), out);
    collect_calls(s->els.get(), out);
    collect_calls(s->init.get(), out);
  }

  // Tarjan's SCC; every strongly connected component with a cycle is one
  // violation, reported at the first function of the cycle in source order.
  void check_recursion()
  {
    std::map<std::string, std::set<std::string>> graph;
    std::map<std::string, SourceSpan> spans;
    for (const auto& f : ast_.functions) {
      collect_calls(f.body.get(), graph[f.name]);
      spans[f.name] = f.span;
    }
    std::map<std::string, int> index, low;
    std::set<std::string> onStack;
    std::vector<std::string> stack;
    int counter = 0;
    std::function<void(const std::string&)> strong = [&](const std::string& v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      onStack.insert(v);
      for (const auto& w : graph[v]) {
        if (!graph.count(w))
          continue;
        if (!index.count(w)) {
          strong(w);
          low[v] = std::min(low[v], low[w]);
        } else if (onStack.count(w)) {
          low[v] = std::min(low[v], index[w]);
        }
      }
      if (low[v] != index[v])
        return;
      std::vector<std::string> comp;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        onStack.erase(w);
        comp.push_back(w);
      } while (w != v);
      if (comp.size() == 1 && !graph[v].count(v))
        return;
      std::sort(comp.begin(), comp.end(),
                [&](const std::string& a, const std::string& b) { return spans[a].begin < spans[b].begin; });
      std::string names;
      for (const auto& n : comp)
        names += (names.empty() ? "" : ", ") + n;
      violation(1, spans[comp.front()], "recursion among functions: " + names);
    };
    for (const auto& f : ast_.functions) {
      if (!index.count(f.name))
        strong(f.name);
    }
  }

  const ContractAst& ast_;
  std::vector<Diagnostic> diags_;
};

class ConstructorValidator {
public:
  explicit ConstructorValidator(const ContractAst& ast) : ast_(ast) {}

  std::vector<Diagnostic> run()
  {
    if (ast_.ctor && ast_.ctor->body)
      check_stmt(*ast_.ctor->body, "");
    for (const auto& v : ast_.stateVars) {
      if (v.initializer)
        check_expr(*v.initializer, "");
    }
    return std::move(diags_);
  }

private:
  void flag(SourceSpan span, const std::string& what, const std::string& via)
  {
    std::string msg = "constructor " + what;
    if (!via.empty())
      msg += " (via call to '" + via + "')";
    diags_.push_back(Diagnostic{DiagKind::ConstructorViolation, 0, std::move(msg), span});
  }

  void check_stmt(const Stmt& s, const std::string& via)
  {
    switch (s.kind) {
    case StmtKind::Block:
      for (const auto& c : s.stmts)
        check_stmt(*c, via);
      break;
    case StmtKind::Throw:
      flag(s.span, "may throw", via);
      break;
    case StmtKind::If:
      check_expr(*s.expr, via);
      check_stmt(*s.then, via);
      if (s.els)
        check_stmt(*s.els, via);
      break;
    default:
      if (s.expr)
        check_expr(*s.expr, via);
      break;
    }
  }

  void check_expr(const Expr& e, const std::string& via)
  {
    switch (e.kind) {
    case ExprKind::Binary:
      if (e.text == "/" || e.text == "%")
        flag(e.span, "divides and may throw on a zero divisor", via);
      break;
    case ExprKind::Assign:
      if (e.text == "/=" || e.text == "%=")
        flag(e.span, "divides and may throw on a zero divisor", via);
      break;
    case ExprKind::Index:
      if (e.args[0]->type.kind == TypeKind::StaticArray && e.args[1]->kind != ExprKind::Number)
        flag(e.span, "indexes an array with a value that may be out of bounds", via);
      else if (e.args[0]->type.kind == TypeKind::StaticArray && e.args[1]->value >= e.args[0]->type.length)
        flag(e.span, "indexes an array out of bounds", via);
      break;
    case ExprKind::Call:
      switch (e.builtin) {
      case Builtin::Require:
      case Builtin::Assert:
      case Builtin::Revert:
        flag(e.span, "may throw", via);
        break;
      case Builtin::AddMod:
      case Builtin::MulMod:
        flag(e.span, "may throw on a zero modulus", via);
        break;
      case Builtin::Transfer:
        flag(e.span, "calls transfer", via);
        break;
      case Builtin::Selfdestruct:
        flag(e.span, "calls selfdestruct", via);
        break;
      default:
        break;
      }
      if (e.ref == RefKind::Function && !visiting_.count(e.target)) {
        const FunDecl* f = ast_.find_function(e.target);
        if (f && f->body) {
          visiting_.insert(e.target);
          std::size_t before = diags_.size();
          check_stmt(*f->body, via.empty() ? e.target : via);
          // report at the call site so the span lies inside the constructor
          for (std::size_t i = before; i < diags_.size(); ++i)
            diags_[i].span = e.span;
          visiting_.erase(e.target);
        }
      }
      break;
    default:
      break;
    }
    for (const auto& a : e.args)
      check_expr(*a, via);
  }

  const ContractAst& ast_;
  std::vector<Diagnostic> diags_;
  std::set<std::string> visiting_;
};

} // namespace

std::vector<Diagnostic> validate_subset(const ContractAst& ast)
{
  return SubsetValidator(ast).run();
}

std::vector<Diagnostic> validate_constructor(const ContractAst& ast)
{
  return ConstructorValidator(ast).run();
}

} // namespace solbmc::frontend
