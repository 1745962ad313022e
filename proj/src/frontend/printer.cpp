#include "solbmc/frontend.hpp"

#include <sstream>

namespace solbmc::frontend {

namespace {

std::string quote(const std::string& s)
{
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\')
      out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string params_str(const std::vector<Param>& ps)
{
  std::string out = "(";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i)
      out += ", ";
    out += ps[i].type.str();
    if (!ps[i].name.empty())
      out += " " + ps[i].name;
  }
  return out + ")";
}

const char* visibility_str(Visibility v)
{
  switch (v) {
  case Visibility::Public:
    return "public";
  case Visibility::External:
    return "external";
  case Visibility::Internal:
    return "internal";
  case Visibility::Private:
    return "private";
  }
  return "public";
}

class Printer {
public:
  std::string contract(const ContractAst& c)
  {
    for (const auto& o : c.others) {
      const char* kw = o.kind == OtherDefinition::Kind::Interface ? "interface"
                       : o.kind == OtherDefinition::Kind::Library ? "library"
                                                                  : "contract";
      out_ << kw << " " << o.name << " {\n}\n\n";
    }
    out_ << "contract " << c.name;
    for (std::size_t i = 0; i < c.bases.size(); ++i)
      out_ << (i ? ", " : " is ") << c.bases[i];
    out_ << " {\n";
    for (const auto& en : c.enums) {
      out_ << "  enum " << en.name << " { ";
      for (std::size_t i = 0; i < en.members.size(); ++i)
        out_ << (i ? ", " : "") << en.members[i];
      out_ << " }\n";
    }
    for (const auto& ev : c.events)
      out_ << "  event " << ev.name << params_str(ev.params) << ";\n";
    for (const auto& v : c.stateVars) {
      out_ << "  " << v.type.str() << (v.isConstant ? " constant " : " ") << v.name;
      if (v.initializer)
        out_ << " = " << expr(*v.initializer);
      out_ << ";\n";
    }
    if (c.ctor)
      function(*c.ctor);
    for (const auto& f : c.functions)
      function(f);
    out_ << "}\n";
    return out_.str();
  }

  void function(const FunDecl& f)
  {
    out_ << "\n  ";
    if (f.isConstructor)
      out_ << "constructor" << params_str(f.params);
    else
      out_ << "function " << f.name << params_str(f.params) << " " << visibility_str(f.visibility);
    if (f.isConstructor && f.visibility != Visibility::Public)
      out_ << " " << visibility_str(f.visibility);
    if (f.payable)
      out_ << " payable";
    for (const auto& m : f.modifiers)
      out_ << " " << m;
    if (!f.returns.empty())
      out_ << " returns " << params_str(f.returns);
    if (!f.body) {
      out_ << ";\n";
      return;
    }
    out_ << " ";
    stmt(*f.body, 1);
    out_ << "\n";
  }

  void indent(int depth)
  {
    for (int i = 0; i < depth; ++i)
      out_ << "  ";
  }

  // Prints a statement starting at the current column; nested lines use `depth`.
  void stmt(const Stmt& s, int depth)
  {
    switch (s.kind) {
    case StmtKind::Block:
      out_ << "{\n";
      for (const auto& c : s.stmts) {
        indent(depth + 1);
        stmt(*c, depth + 1);
        out_ << "\n";
      }
      indent(depth);
      out_ << "}";
      break;
    case StmtKind::VarDecl:
      out_ << (s.isVar ? std::string("var") : s.declType.str()) << " " << s.name;
      if (s.expr)
        out_ << " = " << expr(*s.expr);
      out_ << ";";
      break;
    case StmtKind::Expr:
      out_ << expr(*s.expr) << ";";
      break;
    case StmtKind::If:
      out_ << "if (" << expr(*s.expr) << ") ";
      stmt(*s.then, depth);
      if (s.els) {
        out_ << " else ";
        stmt(*s.els, depth);
      }
      break;
    case StmtKind::For:
      out_ << "for (";
      if (s.init)
        stmt(*s.init, depth);
      else
        out_ << ";";
      out_ << " ";
      if (s.expr)
        out_ << expr(*s.expr);
      out_ << "; ";
      if (s.post)
        out_ << expr(*s.post);
      out_ << ") ";
      stmt(*s.then, depth);
      break;
    case StmtKind::While:
      out_ << "while (" << expr(*s.expr) << ") ";
      stmt(*s.then, depth);
      break;
    case StmtKind::DoWhile:
      out_ << "do ";
      stmt(*s.then, depth);
      out_ << " while (" << expr(*s.expr) << ");";
      break;
    case StmtKind::Return:
      out_ << "return";
      if (s.expr)
        out_ << " " << expr(*s.expr);
      out_ << ";";
      break;
    case StmtKind::Emit:
      out_ << "emit " << expr(*s.expr) << ";";
      break;
    case StmtKind::Throw:
      out_ << "throw;";
      break;
    case StmtKind::Break:
      out_ << "break;";
      break;
    case StmtKind::Continue:
      out_ << "continue;";
      break;
    }
  }

  static std::string args_str(const Expr& e, std::size_t from)
  {
    std::string out;
    for (std::size_t i = from; i < e.args.size(); ++i) {
      if (i > from)
        out += ", ";
      out += expr(*e.args[i]);
    }
    return out;
  }

  static std::string expr(const Expr& e)
  {
    switch (e.kind) {
    case ExprKind::Number:
      return e.unit.empty() ? e.text : e.text + " " + e.unit;
    case ExprKind::BoolLit:
    case ExprKind::Ident:
      return e.text;
    case ExprKind::StringLit:
      return quote(e.text);
    case ExprKind::Member:
      return expr(*e.args[0]) + "." + e.text;
    case ExprKind::Index:
      return expr(*e.args[0]) + "[" + expr(*e.args[1]) + "]";
    case ExprKind::Call:
      return expr(*e.args[0]) + "(" + args_str(e, 1) + ")";
    case ExprKind::TypeConv:
      return e.text + "(" + expr(*e.args[0]) + ")";
    case ExprKind::Unary:
      if (e.postfix)
        return "(" + expr(*e.args[0]) + e.text + ")";
      if (e.text == "delete")
        return "(delete " + expr(*e.args[0]) + ")";
      return "(" + e.text + expr(*e.args[0]) + ")";
    case ExprKind::Binary:
      return "(" + expr(*e.args[0]) + " " + e.text + " " + expr(*e.args[1]) + ")";
    case ExprKind::Assign:
      return expr(*e.args[0]) + " " + e.text + " " + expr(*e.args[1]);
    case ExprKind::Ternary:
      return "(" + expr(*e.args[0]) + " ? " + expr(*e.args[1]) + " : " + expr(*e.args[2]) + ")";
    case ExprKind::New:
      return "new " + e.convType.str() + "(" + args_str(e, 0) + ")";
    }
    return "?";
  }

private:
  std::ostringstream out_;
};

bool equal_params(const std::vector<Param>& a, const std::vector<Param>& b)
{
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || !(a[i].type == b[i].type))
      return false;
  }
  return true;
}

bool equal_fun(const FunDecl& a, const FunDecl& b)
{
  if (a.isConstructor != b.isConstructor)
    return false;
  if (!a.isConstructor && a.name != b.name)
    return false;
  return equal_params(a.params, b.params) && equal_params(a.returns, b.returns) && a.visibility == b.visibility &&
         a.payable == b.payable && a.modifiers == b.modifiers && equal_stmt(a.body.get(), b.body.get());
}

} // namespace

std::string print_contract(const ContractAst& ast)
{
  return Printer().contract(ast);
}

std::string print_expr(const Expr& e)
{
  return Printer::expr(e);
}

bool equal_expr(const Expr* a, const Expr* b)
{
  if (!a || !b)
    return a == b;
  if (a->kind != b->kind || a->args.size() != b->args.size() || a->postfix != b->postfix)
    return false;
  switch (a->kind) {
  case ExprKind::Number:
    if (a->value != b->value)
      return false;
    break;
  case ExprKind::TypeConv:
  case ExprKind::New:
    if (!(a->convType == b->convType))
      return false;
    break;
  default:
    if (a->text != b->text)
      return false;
  }
  for (std::size_t i = 0; i < a->args.size(); ++i) {
    if (!equal_expr(a->args[i].get(), b->args[i].get()))
      return false;
  }
  return true;
}

bool equal_stmt(const Stmt* a, const Stmt* b)
{
  if (!a || !b)
    return a == b;
  if (a->kind != b->kind || a->stmts.size() != b->stmts.size() || a->name != b->name || a->isVar != b->isVar)
    return false;
  if (a->kind == StmtKind::VarDecl && !a->isVar && !(a->declType == b->declType))
    return false;
  for (std::size_t i = 0; i < a->stmts.size(); ++i) {
    if (!equal_stmt(a->stmts[i].get(), b->stmts[i].get()))
      return false;
  }
  return equal_expr(a->expr.get(), b->expr.get()) && equal_stmt(a->then.get(), b->then.get()) &&
         equal_stmt(a->els.get(), b->els.get()) && equal_stmt(a->init.get(), b->init.get()) &&
         equal_expr(a->post.get(), b->post.get());
}

bool equal_ast(const ContractAst& a, const ContractAst& b)
{
  if (a.name != b.name || a.bases != b.bases || a.enums.size() != b.enums.size() ||
      a.stateVars.size() != b.stateVars.size() || a.events.size() != b.events.size() ||
      a.functions.size() != b.functions.size() || a.ctor.has_value() != b.ctor.has_value() ||
      a.others.size() != b.others.size())
    return false;
  for (std::size_t i = 0; i < a.others.size(); ++i) {
    if (a.others[i].kind != b.others[i].kind || a.others[i].name != b.others[i].name)
      return false;
  }
  for (std::size_t i = 0; i < a.enums.size(); ++i) {
    if (a.enums[i].name != b.enums[i].name || a.enums[i].members != b.enums[i].members)
      return false;
  }
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    if (a.events[i].name != b.events[i].name || !equal_params(a.events[i].params, b.events[i].params))
      return false;
  }
  for (std::size_t i = 0; i < a.stateVars.size(); ++i) {
    const auto& x = a.stateVars[i];
    const auto& y = b.stateVars[i];
    if (x.name != y.name || !(x.type == y.type) || x.isConstant != y.isConstant ||
        !equal_expr(x.initializer.get(), y.initializer.get()))
      return false;
  }
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    if (!equal_fun(a.functions[i], b.functions[i]))
      return false;
  }
  return !a.ctor || equal_fun(*a.ctor, *b.ctor);
}

} // namespace solbmc::frontend
