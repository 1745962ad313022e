#include "solbmc/diagnostics.hpp"
#include "solbmc/symexec.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace solbmc::symexec {

using namespace frontend;

namespace {

bool contains_call(const Expr& e)
{
  if (e.kind == ExprKind::Call && e.ref == RefKind::Function)
    return true;
  return std::any_of(e.args.begin(), e.args.end(), [](const ExprPtr& a) { return contains_call(*a); });
}

bool reads_state(const Expr& e)
{
  if (e.ref == RefKind::StateVar || e.ref == RefKind::Balance)
    return true;
  return std::any_of(e.args.begin(), e.args.end(), [](const ExprPtr& a) { return reads_state(*a); });
}

/// Evaluating `e` early cannot observe different values than evaluating it
/// at its original position.
bool stable(const Expr& e) { return !reads_state(e) && !contains_call(e); }

/// Safe to duplicate or drop: no state reads and no throwing constructs.
bool trivial(const Expr& e)
{
  switch (e.kind) {
  case ExprKind::Number:
  case ExprKind::BoolLit:
    return true;
  case ExprKind::Ident:
    return e.ref == RefKind::Local || e.ref == RefKind::Param || e.ref == RefKind::Now || e.ref == RefKind::This;
  case ExprKind::Member:
    return e.ref == RefKind::MsgSender || e.ref == RefKind::MsgValue || e.ref == RefKind::Now ||
           e.ref == RefKind::EnumValue;
  default:
    return false;
  }
}

bool contains_return(const Stmt* s)
{
  if (!s)
    return false;
  if (s->kind == StmtKind::Return)
    return true;
  return std::any_of(s->stmts.begin(), s->stmts.end(), [](const StmtPtr& c) { return contains_return(c.get()); }) ||
         contains_return(s->then.get()) || contains_return(s->els.get());
}

void collect_assigned_expr(const Expr& e, std::set<std::string>& out)
{
  auto base_name = [](const Expr* x) -> const Expr* {
    while (x->kind == ExprKind::Index || x->kind == ExprKind::Member)
      x = x->args[0].get();
    return x;
  };
  if (e.kind == ExprKind::Assign ||
      (e.kind == ExprKind::Unary && (e.text == "++" || e.text == "--" || e.text == "delete"))) {
    const Expr* b = base_name(e.args[0].get());
    if (b->kind == ExprKind::Ident)
      out.insert(b->text);
  }
  for (const auto& a : e.args)
    collect_assigned_expr(*a, out);
}

void collect_assigned(const Stmt* s, std::set<std::string>& out)
{
  if (!s)
    return;
  if (s->expr)
    collect_assigned_expr(*s->expr, out);
  if (s->post)
    collect_assigned_expr(*s->post, out);
  for (const auto& c : s->stmts)
    collect_assigned(c.get(), out);
  collect_assigned(s->then.get(), out);
  collect_assigned(s->els.get(), out);
  collect_assigned(s->init.get(), out);
}

void collect_locals(const Stmt* s, std::vector<std::pair<std::string, SolType>>& out)
{
  if (!s)
    return;
  if (s->kind == StmtKind::VarDecl)
    out.emplace_back(s->name, s->declType);
  for (const auto& c : s->stmts)
    collect_locals(c.get(), out);
  collect_locals(s->then.get(), out);
  collect_locals(s->els.get(), out);
  collect_locals(s->init.get(), out);
}

using Subst = std::map<std::string, ExprPtr>;

ExprPtr rename_expr(const ExprPtr& e, const Subst& subst)
{
  if (e->kind == ExprKind::Ident && (e->ref == RefKind::Local || e->ref == RefKind::Param)) {
    auto it = subst.find(e->text);
    if (it != subst.end())
      return it->second;
    return e;
  }
  if (e->args.empty())
    return e;
  auto c = std::make_shared<Expr>(*e);
  for (auto& a : c->args)
    a = rename_expr(a, subst);
  return c;
}

StmtPtr rename_stmt(const StmtPtr& s, const Subst& subst)
{
  if (!s)
    return s;
  auto c = std::make_shared<Stmt>(*s);
  if (c->kind == StmtKind::VarDecl) {
    auto it = subst.find(c->name);
    if (it != subst.end())
      c->name = it->second->text;
  }
  if (c->expr)
    c->expr = rename_expr(c->expr, subst);
  if (c->post)
    c->post = rename_expr(c->post, subst);
  for (auto& x : c->stmts)
    x = rename_stmt(x, subst);
  c->then = rename_stmt(c->then, subst);
  c->els = rename_stmt(c->els, subst);
  c->init = rename_stmt(c->init, subst);
  return c;
}

ExprPtr make_ident(const std::string& name, const SolType& type, SourceSpan span)
{
  auto e = make_expr(ExprKind::Ident, span, name);
  e->ref = RefKind::Local;
  e->type = type;
  e->lvalue = true;
  return e;
}

ExprPtr make_bool(bool b, SourceSpan span)
{
  auto e = make_expr(ExprKind::BoolLit, span, b ? "true" : "false");
  e->type = SolType::boolean();
  return e;
}

ExprPtr make_not(ExprPtr x)
{
  auto e = make_expr(ExprKind::Unary, x->span, "!", {x});
  e->type = SolType::boolean();
  return e;
}

StmtPtr make_decl(const std::string& name, const SolType& type, ExprPtr init, SourceSpan span)
{
  auto s = make_stmt(StmtKind::VarDecl, span);
  s->name = name;
  s->declType = type;
  s->expr = std::move(init);
  return s;
}

StmtPtr make_assign(ExprPtr lhs, ExprPtr rhs)
{
  auto s = make_stmt(StmtKind::Expr, lhs->span);
  auto e = make_expr(ExprKind::Assign, lhs->span, "=", {lhs, rhs});
  e->type = lhs->type;
  s->expr = e;
  return s;
}

StmtPtr as_single(std::vector<StmtPtr> stmts, SourceSpan span)
{
  if (stmts.size() == 1)
    return stmts.front();
  return make_block(span, std::move(stmts));
}

class Inliner {
public:
  explicit Inliner(const ContractAst& ast) : ast_(ast) {}

  FunDecl run(const FunDecl& f)
  {
    FunDecl out = f;
    stack_.push_back(f.name);
    if (f.body)
      out.body = as_single(lower_stmt(f.body), f.body->span);
    if (out.body && out.body->kind != StmtKind::Block)
      out.body = make_block(out.body->span, {out.body});
    stack_.pop_back();
    return out;
  }

private:
  std::string fresh(const std::string& fn, const std::string& what)
  {
    return "__" + fn + "_" + what + "_" + std::to_string(++counter_);
  }

  std::vector<StmtPtr> lower_stmt(const StmtPtr& s)
  {
    std::vector<StmtPtr> out;
    switch (s->kind) {
    case StmtKind::Block: {
      std::vector<StmtPtr> body;
      for (const auto& c : s->stmts) {
        auto lowered = lower_stmt(c);
        body.insert(body.end(), lowered.begin(), lowered.end());
      }
      out.push_back(make_block(s->span, std::move(body)));
      return out;
    }
    case StmtKind::VarDecl: {
      auto c = std::make_shared<Stmt>(*s);
      if (c->expr)
        c->expr = lower_expr(c->expr, out);
      out.push_back(c);
      return out;
    }
    case StmtKind::Expr: {
      ExprPtr e = lower_effect(s->expr, out);
      if (e) {
        auto c = std::make_shared<Stmt>(*s);
        c->expr = e;
        out.push_back(c);
      }
      return out;
    }
    case StmtKind::If: {
      auto c = std::make_shared<Stmt>(*s);
      c->expr = lower_expr(s->expr, out);
      c->then = as_single(lower_stmt(s->then), s->then->span);
      if (s->els)
        c->els = as_single(lower_stmt(s->els), s->els->span);
      out.push_back(c);
      return out;
    }
    case StmtKind::Return: {
      auto c = std::make_shared<Stmt>(*s);
      if (c->expr)
        c->expr = lower_expr(c->expr, out);
      out.push_back(c);
      return out;
    }
    case StmtKind::Emit: {
      auto c = std::make_shared<Stmt>(*s);
      c->expr = lower_call_args(s->expr, out);
      out.push_back(c);
      return out;
    }
    default:
      // loops never reach here for subset-valid input
      out.push_back(s);
      return out;
    }
  }

  /// Statement-level expression. Returns null when nothing remains.
  ExprPtr lower_effect(const ExprPtr& e, std::vector<StmtPtr>& pre)
  {
    if (!contains_call(*e))
      return e;
    if (e->kind == ExprKind::Assign) {
      bool rhsCall = contains_call(*e->args[1]);
      auto c = std::make_shared<Expr>(*e);
      c->args[0] = lower_lvalue(e->args[0], pre, rhsCall);
      c->args[1] = lower_expr(e->args[1], pre);
      return c;
    }
    if (e->kind == ExprKind::Unary && (e->text == "++" || e->text == "--" || e->text == "delete")) {
      auto c = std::make_shared<Expr>(*e);
      c->args[0] = lower_lvalue(e->args[0], pre, false);
      return c;
    }
    if (e->kind == ExprKind::Call && e->ref == RefKind::Function) {
      auto args = lower_operands(std::vector<ExprPtr>(e->args.begin() + 1, e->args.end()), pre);
      return inline_call(*e, std::move(args), pre);
    }
    ExprPtr r = lower_expr(e, pre);
    return r;
  }

  ExprPtr lower_lvalue(const ExprPtr& e, std::vector<StmtPtr>& pre, bool laterCall)
  {
    if (e->kind != ExprKind::Index)
      return e;
    auto c = std::make_shared<Expr>(*e);
    bool idxCall = contains_call(*e->args[1]);
    c->args[0] = lower_lvalue(e->args[0], pre, laterCall || idxCall);
    ExprPtr idx = lower_expr(e->args[1], pre);
    if (laterCall && !stable(*idx))
      idx = bind_temp(idx, pre);
    c->args[1] = idx;
    return c;
  }

  ExprPtr bind_temp(const ExprPtr& e, std::vector<StmtPtr>& pre)
  {
    std::string name = fresh("tmp", "v");
    pre.push_back(make_decl(name, e->type, e, e->span));
    return make_ident(name, e->type, e->span);
  }

  std::vector<ExprPtr> lower_operands(const std::vector<ExprPtr>& ops, std::vector<StmtPtr>& pre)
  {
    std::vector<ExprPtr> out;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      bool laterCall = false;
      for (std::size_t j = i + 1; j < ops.size(); ++j)
        laterCall = laterCall || contains_call(*ops[j]);
      ExprPtr x = lower_expr(ops[i], pre);
      if (laterCall && !stable(*x))
        x = bind_temp(x, pre);
      out.push_back(x);
    }
    return out;
  }

  ExprPtr lower_call_args(const ExprPtr& call, std::vector<StmtPtr>& pre)
  {
    if (!contains_call(*call))
      return call;
    auto c = std::make_shared<Expr>(*call);
    auto args = lower_operands(std::vector<ExprPtr>(call->args.begin() + 1, call->args.end()), pre);
    std::copy(args.begin(), args.end(), c->args.begin() + 1);
    return c;
  }

  ExprPtr lower_expr(const ExprPtr& e, std::vector<StmtPtr>& pre)
  {
    if (!contains_call(*e))
      return e;
    switch (e->kind) {
    case ExprKind::Call:
      if (e->ref == RefKind::Function) {
        auto args = lower_operands(std::vector<ExprPtr>(e->args.begin() + 1, e->args.end()), pre);
        ExprPtr r = inline_call(*e, std::move(args), pre);
        if (!r)
          throw ModelError(ModelError::Kind::Internal, "call to '" + e->target + "' has no value", e->span);
        return r;
      }
      break;
    case ExprKind::Binary:
      if ((e->text == "&&" || e->text == "||") && contains_call(*e->args[1])) {
        // t = lhs; if (t) { t = rhs; }   (negated test for ||)
        ExprPtr lhs = lower_expr(e->args[0], pre);
        std::string name = fresh("sc", "v");
        pre.push_back(make_decl(name, SolType::boolean(), lhs, e->span));
        ExprPtr t = make_ident(name, SolType::boolean(), e->span);
        std::vector<StmtPtr> inner;
        ExprPtr rhs = lower_expr(e->args[1], inner);
        inner.push_back(make_assign(t, rhs));
        auto ifs = make_stmt(StmtKind::If, e->span);
        ifs->expr = e->text == "&&" ? t : make_not(t);
        ifs->then = make_block(e->span, std::move(inner));
        pre.push_back(ifs);
        return t;
      }
      break;
    case ExprKind::Ternary:
      if (contains_call(*e->args[1]) || contains_call(*e->args[2])) {
        ExprPtr cond = lower_expr(e->args[0], pre);
        std::string name = fresh("tern", "v");
        pre.push_back(make_decl(name, e->type, nullptr, e->span));
        ExprPtr t = make_ident(name, e->type, e->span);
        std::vector<StmtPtr> a, b;
        ExprPtr va = lower_expr(e->args[1], a);
        a.push_back(make_assign(t, va));
        ExprPtr vb = lower_expr(e->args[2], b);
        b.push_back(make_assign(t, vb));
        auto ifs = make_stmt(StmtKind::If, e->span);
        ifs->expr = cond;
        ifs->then = make_block(e->span, std::move(a));
        ifs->els = make_block(e->span, std::move(b));
        pre.push_back(ifs);
        return t;
      }
      {
        auto c = std::make_shared<Expr>(*e);
        c->args[0] = lower_expr(e->args[0], pre);
        return c;
      }
    default:
      break;
    }
    auto c = std::make_shared<Expr>(*e);
    c->args = lower_operands(e->args, pre);
    return c;
  }

  /// Appends the callee's body to `pre` and returns the expression holding
  /// its result (null for functions without a return value).
  ExprPtr inline_call(const Expr& call, std::vector<ExprPtr> args, std::vector<StmtPtr>& pre)
  {
    const FunDecl* g = ast_.find_function(call.target);
    if (!g || !g->body)
      throw ModelError(ModelError::Kind::Unsupported, "call to '" + call.target + "' which has no body", call.span);
    if (std::find(stack_.begin(), stack_.end(), g->name) != stack_.end())
      throw ModelError(ModelError::Kind::Cycle, "recursive call to '" + g->name + "'", call.span);
    stack_.push_back(g->name);

    std::set<std::string> assigned;
    collect_assigned(g->body.get(), assigned);
    Subst subst;
    for (std::size_t i = 0; i < g->params.size(); ++i) {
      const Param& p = g->params[i];
      if (trivial(*args[i]) && !assigned.count(p.name)) {
        subst[p.name] = args[i];
      } else {
        std::string name = fresh(g->name, p.name);
        pre.push_back(make_decl(name, p.type, args[i], call.span));
        subst[p.name] = make_ident(name, p.type, call.span);
      }
    }

    const Stmt& body = *g->body;
    ExprPtr result;
    if (body.stmts.size() == 1 && body.stmts[0]->kind == StmtKind::Return && body.stmts[0]->expr) {
      result = lower_expr(rename_expr(body.stmts[0]->expr, subst), pre);
      stack_.pop_back();
      return result;
    }

    std::vector<std::pair<std::string, SolType>> locals;
    collect_locals(g->body.get(), locals);
    for (const auto& [l, type] : locals)
      subst[l] = make_ident(fresh(g->name, l), type, call.span);

    std::string retName, doneName;
    auto rt = g->return_type();
    if (rt) {
      retName = fresh(g->name, "ret");
      pre.push_back(make_decl(retName, *rt, nullptr, call.span));
      result = make_ident(retName, *rt, call.span);
    }
    bool needsDone = false;
    {
      std::size_t returns = 0;
      std::function<void(const Stmt*)> count = [&](const Stmt* s) {
        if (!s)
          return;
        if (s->kind == StmtKind::Return)
          ++returns;
        for (const auto& c : s->stmts)
          count(c.get());
        count(s->then.get());
        count(s->els.get());
      };
      count(g->body.get());
      bool lastIsReturn = !body.stmts.empty() && body.stmts.back()->kind == StmtKind::Return;
      needsDone = returns > (lastIsReturn ? 1u : 0u);
    }
    ExprPtr done;
    if (needsDone) {
      doneName = fresh(g->name, "done");
      pre.push_back(make_decl(doneName, SolType::boolean(), make_bool(false, call.span), call.span));
      done = make_ident(doneName, SolType::boolean(), call.span);
    }

    StmtPtr renamed = rename_stmt(g->body, subst);
    auto transformed = transform_returns(renamed->stmts, result, done);
    for (const auto& s : transformed) {
      auto lowered = lower_stmt(s);
      pre.insert(pre.end(), lowered.begin(), lowered.end());
    }
    stack_.pop_back();
    return result;
  }

  StmtPtr transform_one(const StmtPtr& s, const ExprPtr& ret, const ExprPtr& done)
  {
    if (!contains_return(s.get()))
      return s;
    if (s->kind == StmtKind::Block)
      return make_block(s->span, transform_returns(s->stmts, ret, done));
    if (s->kind == StmtKind::If) {
      auto c = std::make_shared<Stmt>(*s);
      c->then = transform_one(s->then, ret, done);
      if (s->els)
        c->els = transform_one(s->els, ret, done);
      return c;
    }
    return as_single(transform_returns({s}, ret, done), s->span);
  }

  std::vector<StmtPtr> transform_returns(const std::vector<StmtPtr>& stmts, const ExprPtr& ret, const ExprPtr& done)
  {
    std::vector<StmtPtr> out;
    for (std::size_t i = 0; i < stmts.size(); ++i) {
      const StmtPtr& s = stmts[i];
      if (s->kind == StmtKind::Return) {
        if (s->expr && ret)
          out.push_back(make_assign(ret, s->expr));
        if (done)
          out.push_back(make_assign(done, make_bool(true, s->span)));
        break;
      }
      if (!contains_return(s.get())) {
        out.push_back(s);
        continue;
      }
      out.push_back(transform_one(s, ret, done));
      if (i + 1 < stmts.size()) {
        std::vector<StmtPtr> rest(stmts.begin() + static_cast<std::ptrdiff_t>(i) + 1, stmts.end());
        auto guard = make_stmt(StmtKind::If, s->span);
        guard->expr = make_not(done);
        guard->then = make_block(s->span, transform_returns(rest, ret, done));
        out.push_back(guard);
      }
      break;
    }
    return out;
  }

  const ContractAst& ast_;
  std::vector<std::string> stack_;
  int counter_ = 0;
};

// ---- emit counting --------------------------------------------------------

constexpr int kNone = -1000000;

struct Outcome {
  int fall = 0;    // paths continuing past the construct
  int ret = kNone; // paths leaving the current function by `return`
  int halt = kNone; // paths ending the transaction (selfdestruct)
};

int plus(int a, int b) { return (a == kNone || b == kNone) ? kNone : a + b; }

Outcome seq(const Outcome& a, const Outcome& b)
{
  return {plus(a.fall, b.fall), std::max(a.ret, plus(a.fall, b.ret)), std::max(a.halt, plus(a.fall, b.halt))};
}

Outcome join(const Outcome& a, const Outcome& b)
{
  return {std::max(a.fall, b.fall), std::max(a.ret, b.ret), std::max(a.halt, b.halt)};
}

class EmitCounter {
public:
  explicit EmitCounter(const ContractAst& ast) : ast_(ast) {}

  Outcome function(const FunDecl& f)
  {
    if (std::find(stack_.begin(), stack_.end(), f.name) != stack_.end())
      throw ModelError(ModelError::Kind::Cycle, "recursive call to '" + f.name + "'", f.span);
    stack_.push_back(f.name);
    Outcome o = f.body ? stmt(*f.body) : Outcome{};
    stack_.pop_back();
    return o;
  }

private:
  Outcome expr(const Expr& e)
  {
    Outcome o;
    for (const auto& a : e.args)
      o = seq(o, expr(*a));
    if (e.kind == ExprKind::Call) {
      if (e.ref == RefKind::Function) {
        if (const FunDecl* g = ast_.find_function(e.target)) {
          Outcome c = function(*g);
          o = seq(o, Outcome{std::max(c.fall, c.ret), kNone, c.halt});
        }
      } else if (e.ref == RefKind::Event) {
        o = seq(o, Outcome{1, kNone, kNone});
      } else if (e.builtin == Builtin::Revert) {
        o = seq(o, Outcome{kNone, kNone, kNone});
      } else if (e.builtin == Builtin::Selfdestruct) {
        o = seq(o, Outcome{kNone, kNone, 0});
      }
    }
    return o;
  }

  Outcome stmt(const Stmt& s)
  {
    switch (s.kind) {
    case StmtKind::Block: {
      Outcome o;
      for (const auto& c : s.stmts)
        o = seq(o, stmt(*c));
      return o;
    }
    case StmtKind::If: {
      Outcome c = expr(*s.expr);
      Outcome t = stmt(*s.then);
      Outcome e = s.els ? stmt(*s.els) : Outcome{};
      return seq(c, join(t, e));
    }
    case StmtKind::Return: {
      Outcome o = s.expr ? expr(*s.expr) : Outcome{};
      return {kNone, std::max(o.fall, o.ret), o.halt};
    }
    case StmtKind::Throw:
      return {kNone, kNone, kNone};
    case StmtKind::Emit: {
      Outcome o;
      for (std::size_t i = 1; i < s.expr->args.size(); ++i)
        o = seq(o, expr(*s.expr->args[i]));
      return seq(o, Outcome{1, kNone, kNone});
    }
    default: {
      Outcome o;
      if (s.init)
        o = seq(o, stmt(*s.init));
      if (s.expr)
        o = seq(o, expr(*s.expr));
      return o;
    }
    }
  }

  const ContractAst& ast_;
  std::vector<std::string> stack_;
};

} // namespace

FunDecl inline_internal_calls(const FunDecl& f, const ContractAst& ast)
{
  return Inliner(ast).run(f);
}

int max_emits_per_path(const FunDecl& f, const ContractAst& ast)
{
  Outcome o = EmitCounter(ast).function(f);
  return std::max({o.fall, o.ret, o.halt, 0});
}

} // namespace solbmc::symexec
