#include "solbmc/symexec.hpp"

#include "solbmc/diagnostics.hpp"

#include <functional>
#include <map>
#include <sstream>

namespace solbmc::symexec {

using namespace term;
using frontend::Builtin;
using frontend::ContractAst;
using frontend::Expr;
using frontend::ExprKind;
using frontend::FunDecl;
using frontend::RefKind;
using frontend::SolType;
using frontend::Stmt;
using frontend::StmtKind;
using frontend::TypeKind;
using model::ScalarSort;

std::optional<unsigned> EventSet::tag_of(std::string_view name) const
{
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i]->name == name)
      return static_cast<unsigned>(i + 1);
  }
  return std::nullopt;
}

std::string EventSet::name_of(unsigned tag) const
{
  if (tag == 0 || tag > events.size())
    return "NoEvent";
  return events[tag - 1]->name;
}

const TransitionFn* ContractModel::find_function(std::string_view name) const
{
  for (const auto& f : functions) {
    if (f.fname == name)
      return &f;
  }
  return nullptr;
}

std::optional<unsigned> ContractModel::function_index(std::string_view name) const
{
  for (std::size_t i = 0; i < functions.size(); ++i) {
    if (functions[i].fname == name)
      return static_cast<unsigned>(i);
  }
  return std::nullopt;
}

Sort ContractModel::sort_of(ScalarSort s) const
{
  switch (s) {
  case ScalarSort::Bool:
    return Sort::boolean();
  case ScalarSort::Addr:
    return Sort::addr();
  default:
    return Sort::bv(cfg.intWidth);
  }
}

Term zero_of(ScalarSort s, unsigned width)
{
  switch (s) {
  case ScalarSort::Bool:
    return mk_bool(false);
  case ScalarSort::Addr:
    return mk_addr(0);
  default:
    return mk_bv(0, width);
  }
}

Term addr_to_bv(const Term& a, std::size_t domainSize, unsigned width)
{
  if (a->is_const())
    return mk_bv(a->value, width);
  Term r = mk_bv(domainSize - 1, width);
  for (std::size_t i = domainSize - 1; i-- > 0;)
    r = ite(eq(a, mk_addr(static_cast<unsigned>(i))), mk_bv(i, width), r);
  return r;
}

Term bool_to_bv(const Term& b, unsigned width) { return ite(b, mk_bv(1, width), mk_bv(0, width)); }

namespace {

Sort sort_for(ScalarSort s, unsigned width)
{
  switch (s) {
  case ScalarSort::Bool:
    return Sort::boolean();
  case ScalarSort::Addr:
    return Sort::addr();
  default:
    return Sort::bv(width);
  }
}

ParamInfo param_info(const frontend::Param& p, const ContractAst& ast)
{
  ParamInfo info{p.name, p.type, model::scalar_sort(p.type), 0};
  if (p.type.kind == TypeKind::Enum) {
    if (const auto* en = ast.find_enum(p.type.name))
      info.enumSize = static_cast<unsigned>(en->members.size());
  }
  return info;
}

struct SymState {
  std::map<std::string, Term> locals;
  std::vector<Term> slots;
  std::vector<Term> balances;
  Term alive;
  Term tag;
  std::array<Term, 4> args;
  Term active; // false once the path returned, halted or threw
};

struct StorageRef {
  std::vector<std::pair<Term, std::size_t>> cells; // (condition, first slot)
  SolType type;
};

class Executor {
public:
  enum class Mode { Transaction, Constructor };

  Executor(const ContractAst& ast, const model::ModelConfig& cfg, const model::AddrDomain& addrs,
           const model::SlotLayout& layout, const EventSet* events, Mode mode)
      : ast_(ast), w_(cfg.intWidth), addrs_(addrs), layout_(layout), events_(events), mode_(mode)
  {
  }

  std::vector<Term> safety;

  void exec(const Stmt& s, SymState& st, const Term& guard)
  {
    switch (s.kind) {
    case StmtKind::Block:
      for (const auto& c : s.stmts)
        exec(*c, st, guard);
      return;
    case StmtKind::VarDecl: {
      Term v = s.expr ? eval(*s.expr, st, guard) : zero_of(model::scalar_sort(s.declType), w_);
      st.locals[s.name] = v;
      return;
    }
    case StmtKind::Expr:
      effect(*s.expr, st, guard);
      return;
    case StmtKind::If: {
      Term c = eval(*s.expr, st, guard);
      if (c->is_true()) {
        exec(*s.then, st, guard);
        return;
      }
      if (c->is_false()) {
        if (s.els)
          exec(*s.els, st, guard);
        return;
      }
      SymState a = st;
      SymState b = st;
      exec(*s.then, a, and_(guard, c));
      if (s.els)
        exec(*s.els, b, and_(guard, not_(c)));
      st = merge(c, a, b);
      return;
    }
    case StmtKind::Return:
      if (s.expr)
        eval(*s.expr, st, guard);
      st.active = mk_bool(false);
      return;
    case StmtKind::Emit:
      emit(*s.expr, st, guard);
      return;
    case StmtKind::Throw:
      fail(st, guard);
      return;
    default:
      throw ModelError(ModelError::Kind::Unsupported, "loops cannot be executed symbolically", s.span);
    }
  }

  Term eval(const Expr& e, SymState& st, const Term& guard)
  {
    switch (e.kind) {
    case ExprKind::Number:
      return mk_bv(e.value, w_);
    case ExprKind::BoolLit:
      return mk_bool(e.text == "true");
    case ExprKind::Ident:
      return ident(e, st, guard);
    case ExprKind::Member:
      return member(e, st, guard);
    case ExprKind::Index:
      return read_storage(resolve(e, st, guard), st);
    case ExprKind::Call:
      return call_value(e, st, guard);
    case ExprKind::TypeConv:
      return conversion(e, st, guard);
    case ExprKind::Unary: {
      Term x = eval(*e.args[0], st, guard);
      if (e.text == "!")
        return not_(x);
      if (e.text == "-")
        return neg(x);
      break;
    }
    case ExprKind::Binary:
      return binary(e, st, guard);
    case ExprKind::Ternary: {
      Term c = eval(*e.args[0], st, guard);
      if (c->is_true())
        return eval(*e.args[1], st, guard);
      if (c->is_false())
        return eval(*e.args[2], st, guard);
      Term a = eval(*e.args[1], st, and_(guard, c));
      Term b = eval(*e.args[2], st, and_(guard, not_(c)));
      return ite(c, a, b);
    }
    default:
      break;
    }
    throw ModelError(ModelError::Kind::Unsupported, "expression is outside the modeled subset", e.span);
  }

  Term balance_of(const Term& a, const SymState& st) const
  {
    if (a->is_const())
      return st.balances.at(static_cast<std::size_t>(a->value));
    Term r = st.balances.back();
    for (std::size_t i = st.balances.size() - 1; i-- > 0;)
      r = ite(eq(a, mk_addr(static_cast<unsigned>(i))), st.balances[i], r);
    return r;
  }

  void credit(const Term& a, const Term& amount, SymState& st, bool debit = false) const
  {
    for (std::size_t i = 0; i < st.balances.size(); ++i) {
      Term hit = and_(st.active, eq(a, mk_addr(static_cast<unsigned>(i))));
      Term moved = debit ? sub(st.balances[i], amount) : add(st.balances[i], amount);
      st.balances[i] = ite(hit, moved, st.balances[i]);
    }
  }

  Term input_time() const
  {
    return mode_ == Mode::Constructor ? mk_var({InputKind::Blocktime, 0, {}}, Sort::bv(w_))
                                      : mk_var({InputKind::Time, 0, {}}, Sort::bv(w_));
  }

private:
  void require(const Term& cond, const SymState& st, const Term& guard)
  {
    Term t = implies(and_(guard, st.active), cond);
    if (!t->is_true())
      safety.push_back(t);
  }

  void fail(SymState& st, const Term& guard)
  {
    require(mk_bool(false), st, guard);
    st.active = mk_bool(false);
  }

  SymState merge(const Term& c, const SymState& a, const SymState& b) const
  {
    SymState r;
    for (const auto& [name, va] : a.locals) {
      auto it = b.locals.find(name);
      r.locals[name] = it == b.locals.end() ? va : ite(c, va, it->second);
    }
    for (const auto& [name, vb] : b.locals)
      r.locals.emplace(name, vb);
    r.slots.resize(a.slots.size());
    for (std::size_t i = 0; i < a.slots.size(); ++i)
      r.slots[i] = ite(c, a.slots[i], b.slots[i]);
    r.balances.resize(a.balances.size());
    for (std::size_t i = 0; i < a.balances.size(); ++i)
      r.balances[i] = ite(c, a.balances[i], b.balances[i]);
    r.alive = ite(c, a.alive, b.alive);
    r.tag = ite(c, a.tag, b.tag);
    for (std::size_t i = 0; i < 4; ++i)
      r.args[i] = ite(c, a.args[i], b.args[i]);
    r.active = ite(c, a.active, b.active);
    return r;
  }

  std::size_t flat_size(const SolType& t) const
  {
    switch (t.kind) {
    case TypeKind::Mapping:
      return addrs_.size() * flat_size(*t.elem);
    case TypeKind::StaticArray:
      return t.length * flat_size(*t.elem);
    default:
      return 1;
    }
  }

  StorageRef resolve(const Expr& e, SymState& st, const Term& guard)
  {
    if (e.kind == ExprKind::Ident && e.ref == RefKind::StateVar) {
      const auto* v = ast_.find_state_var(e.text);
      return StorageRef{{{mk_bool(true), layout_.range_of(e.text).first}}, v->type};
    }
    if (e.kind == ExprKind::Index) {
      StorageRef base = resolve(*e.args[0], st, guard);
      Term idx = eval(*e.args[1], st, guard);
      const SolType& bt = base.type;
      std::size_t elemSize = flat_size(*bt.elem);
      StorageRef out;
      out.type = *bt.elem;
      if (bt.kind == TypeKind::Mapping) {
        for (const auto& [c, off] : base.cells) {
          for (unsigned a = 0; a < addrs_.size(); ++a) {
            Term cond = and_(c, eq(idx, mk_addr(a)));
            if (!cond->is_false())
              out.cells.emplace_back(cond, off + a * elemSize);
          }
        }
        return out;
      }
      if (bt.kind == TypeKind::StaticArray) {
        Word mask = width_mask(w_);
        if (Word(bt.length) <= mask)
          require(ult(idx, mk_bv(bt.length, w_)), st, guard);
        for (const auto& [c, off] : base.cells) {
          for (std::uint64_t j = 0; j < bt.length && Word(j) <= mask; ++j) {
            Term cond = and_(c, eq(idx, mk_bv(j, w_)));
            if (!cond->is_false())
              out.cells.emplace_back(cond, off + j * elemSize);
          }
        }
        if (out.cells.empty()) // index provably out of bounds; the path is dropped by the safety condition
          out.cells.emplace_back(mk_bool(true), base.cells.front().second);
        return out;
      }
    }
    throw ModelError(ModelError::Kind::Unsupported, "unsupported storage access", e.span);
  }

  Term read_storage(const StorageRef& ref, const SymState& st) const
  {
    if (!ref.type.is_scalar())
      throw ModelError(ModelError::Kind::Unsupported, "composite value used as a scalar");
    Term r = st.slots.at(ref.cells.back().second);
    for (std::size_t i = ref.cells.size() - 1; i-- > 0;)
      r = ite(ref.cells[i].first, st.slots.at(ref.cells[i].second), r);
    return r;
  }

  void write_storage(const StorageRef& ref, SymState& st, const std::function<Term(std::size_t)>& value)
  {
    std::size_t n = flat_size(ref.type);
    for (const auto& [cond, off] : ref.cells) {
      Term hit = and_(st.active, cond);
      for (std::size_t k = 0; k < n; ++k)
        st.slots[off + k] = ite(hit, value(off + k), st.slots[off + k]);
    }
  }

  Term ident(const Expr& e, SymState& st, const Term& guard)
  {
    switch (e.ref) {
    case RefKind::Local:
    case RefKind::Param: {
      auto it = st.locals.find(e.text);
      if (it == st.locals.end())
        throw ModelError(ModelError::Kind::Internal, "unbound local '" + e.text + "'", e.span);
      return it->second;
    }
    case RefKind::StateVar: {
      const auto* v = ast_.find_state_var(e.text);
      if (v->isConstant) {
        if (!v->initializer)
          return zero_of(model::scalar_sort(v->type), w_);
        return eval(*v->initializer, st, guard);
      }
      return read_storage(resolve(e, st, guard), st);
    }
    case RefKind::Now:
      return input_time();
    case RefKind::This:
      return mk_addr(addrs_.contract());
    default:
      throw ModelError(ModelError::Kind::Unsupported, "identifier '" + e.text + "' cannot be evaluated", e.span);
    }
  }

  Term member(const Expr& e, SymState& st, const Term& guard)
  {
    switch (e.ref) {
    case RefKind::MsgSender:
      return mk_var({InputKind::Sender, 0, {}}, Sort::addr());
    case RefKind::MsgValue:
      return mk_var({InputKind::Value, 0, {}}, Sort::bv(w_));
    case RefKind::Now:
      return input_time();
    case RefKind::EnumValue:
      return mk_bv(e.value, w_);
    case RefKind::Balance:
      return balance_of(eval(*e.args[0], st, guard), st);
    case RefKind::Builtin:
      if (e.builtin == Builtin::Length && e.args[0]->type.kind == TypeKind::StaticArray)
        return mk_bv(e.args[0]->type.length, w_);
      break;
    default:
      break;
    }
    throw ModelError(ModelError::Kind::Unsupported, "member '" + e.text + "' is outside the modeled subset", e.span);
  }

  Term modular(const Expr& e, SymState& st, const Term& guard)
  {
    Term a = eval(*e.args[1], st, guard);
    Term b = eval(*e.args[2], st, guard);
    Term m = eval(*e.args[3], st, guard);
    require(not_(eq(m, mk_bv(0, w_))), st, guard);
    unsigned extra = e.builtin == Builtin::AddMod ? 1 : w_;
    Term wide = e.builtin == Builtin::AddMod ? add(zext(a, extra), zext(b, extra)) : mul(zext(a, extra), zext(b, extra));
    return extract(urem(wide, zext(m, extra)), w_ - 1, 0);
  }

  Term call_value(const Expr& e, SymState& st, const Term& guard)
  {
    if (e.builtin == Builtin::AddMod || e.builtin == Builtin::MulMod)
      return modular(e, st, guard);
    if (e.ref == RefKind::EnumType) {
      Term x = eval(*e.args[1], st, guard);
      const auto* en = ast_.find_enum(e.target);
      Word n = en->members.size();
      if (n <= width_mask(w_))
        require(ult(x, mk_bv(n, w_)), st, guard);
      return x;
    }
    throw ModelError(ModelError::Kind::Unsupported, "call is outside the modeled subset", e.span);
  }

  Term conversion(const Expr& e, SymState& st, const Term& guard)
  {
    const Expr& x = *e.args[0];
    if (e.convType.kind == TypeKind::Address) {
      if (x.kind == ExprKind::Number && x.value == 0)
        return mk_addr(addrs_.no_addr());
      if (x.type.kind == TypeKind::Address)
        return eval(x, st, guard);
    }
    if (e.convType.kind == TypeKind::Uint && (x.type.kind == TypeKind::Uint || x.type.kind == TypeKind::Enum))
      return eval(x, st, guard);
    throw ModelError(ModelError::Kind::Unsupported, "conversion is outside the modeled subset", e.span);
  }

  Term binary(const Expr& e, SymState& st, const Term& guard)
  {
    const std::string& op = e.text;
    Term a = eval(*e.args[0], st, guard);
    if (op == "&&") {
      if (a->is_false())
        return a;
      return and_(a, eval(*e.args[1], st, and_(guard, a)));
    }
    if (op == "||") {
      if (a->is_true())
        return a;
      return or_(a, eval(*e.args[1], st, and_(guard, not_(a))));
    }
    Term b = eval(*e.args[1], st, guard);
    if (op == "==")
      return eq(a, b);
    if (op == "!=")
      return not_(eq(a, b));
    if (op == "<")
      return ult(a, b);
    if (op == "<=")
      return ule(a, b);
    if (op == ">")
      return ugt(a, b);
    if (op == ">=")
      return uge(a, b);
    return arith(op, a, b, e, st, guard);
  }

  Term arith(const std::string& op, const Term& a, const Term& b, const Expr& e, SymState& st, const Term& guard)
  {
    if (op == "+")
      return add(a, b);
    if (op == "-")
      return sub(a, b);
    if (op == "*")
      return mul(a, b);
    if (op == "/" || op == "%") {
      require(not_(eq(b, mk_bv(0, w_))), st, guard);
      return op == "/" ? udiv(a, b) : urem(a, b);
    }
    throw ModelError(ModelError::Kind::Unsupported, "operator '" + op + "' is outside the modeled subset", e.span);
  }

  void assign_to(const Expr& lhs, SymState& st, const Term& guard,
                 const std::function<Term(const Term& old)>& value, bool readsOld)
  {
    if (lhs.kind == ExprKind::Ident && (lhs.ref == RefKind::Local || lhs.ref == RefKind::Param)) {
      Term old = readsOld ? st.locals.at(lhs.text) : Term();
      st.locals[lhs.text] = value(old);
      return;
    }
    StorageRef ref = resolve(lhs, st, guard);
    if (!ref.type.is_scalar()) {
      // only `delete` reaches here with a composite target
      write_storage(ref, st, [&](std::size_t slot) { return zero_of(layout_[slot].sort, w_); });
      return;
    }
    Term v = value(readsOld ? read_storage(ref, st) : Term());
    write_storage(ref, st, [&](std::size_t) { return v; });
  }

  void effect(const Expr& e, SymState& st, const Term& guard)
  {
    switch (e.kind) {
    case ExprKind::Assign: {
      const Expr& lhs = *e.args[0];
      if (e.text == "=") {
        // indices of the target are evaluated before the right-hand side
        if (lhs.kind == ExprKind::Ident && (lhs.ref == RefKind::Local || lhs.ref == RefKind::Param)) {
          st.locals[lhs.text] = eval(*e.args[1], st, guard);
          return;
        }
        StorageRef ref = resolve(lhs, st, guard);
        Term v = eval(*e.args[1], st, guard);
        write_storage(ref, st, [&](std::size_t) { return v; });
        return;
      }
      std::string op = e.text.substr(0, e.text.size() - 1);
      if (lhs.kind == ExprKind::Ident && (lhs.ref == RefKind::Local || lhs.ref == RefKind::Param)) {
        Term v = eval(*e.args[1], st, guard);
        st.locals[lhs.text] = arith(op, st.locals.at(lhs.text), v, e, st, guard);
        return;
      }
      StorageRef ref = resolve(lhs, st, guard);
      Term v = eval(*e.args[1], st, guard);
      Term nv = arith(op, read_storage(ref, st), v, e, st, guard);
      write_storage(ref, st, [&](std::size_t) { return nv; });
      return;
    }
    case ExprKind::Unary:
      if (e.text == "++" || e.text == "--") {
        bool inc = e.text == "++";
        assign_to(*e.args[0], st, guard,
                  [&](const Term& old) { return inc ? add(old, mk_bv(1, w_)) : sub(old, mk_bv(1, w_)); }, true);
        return;
      }
      if (e.text == "delete") {
        SolType t = e.args[0]->type;
        assign_to(*e.args[0], st, guard, [&](const Term&) { return zero_of(model::scalar_sort(t), w_); }, false);
        return;
      }
      break;
    case ExprKind::Call:
      if (e.ref == RefKind::Event) {
        emit(e, st, guard);
        return;
      }
      switch (e.builtin) {
      case Builtin::Require:
      case Builtin::Assert:
        require(eval(*e.args[1], st, guard), st, guard);
        return;
      case Builtin::Revert:
        fail(st, guard);
        return;
      case Builtin::Transfer: {
        Term to = eval(*e.args[0]->args[0], st, guard);
        Term amount = eval(*e.args[1], st, guard);
        if (mode_ == Mode::Constructor)
          throw ModelError(ModelError::Kind::Unsupported, "transfer in a constructor", e.span);
        Term contract = mk_addr(addrs_.contract());
        require(uge(st.balances[addrs_.contract()], amount), st, guard);
        credit(contract, amount, st, /*debit=*/true);
        credit(to, amount, st);
        return;
      }
      case Builtin::Selfdestruct: {
        if (mode_ == Mode::Constructor)
          throw ModelError(ModelError::Kind::Unsupported, "selfdestruct in a constructor", e.span);
        Term to = eval(*e.args[1], st, guard);
        std::size_t c = addrs_.contract();
        Term amount = st.balances[c];
        st.alive = ite(st.active, mk_bool(false), st.alive);
        st.balances[c] = ite(st.active, mk_bv(0, w_), st.balances[c]);
        credit(to, amount, st);
        st.active = mk_bool(false);
        return;
      }
      case Builtin::None:
        if (e.ref == RefKind::Function)
          throw ModelError(ModelError::Kind::Internal, "internal call survived inlining", e.span);
        break;
      default:
        break;
      }
      break;
    default:
      break;
    }
    eval(e, st, guard);
  }

  void emit(const Expr& call, SymState& st, const Term& guard)
  {
    std::vector<Term> values;
    for (std::size_t i = 1; i < call.args.size(); ++i) {
      const Expr& a = *call.args[i];
      Term v = eval(a, st, guard);
      if (v->sort.kind == SortKind::Addr)
        v = addr_to_bv(v, addrs_.size(), w_);
      else if (v->sort.kind == SortKind::Bool)
        v = bool_to_bv(v, w_);
      values.push_back(v);
    }
    if (mode_ == Mode::Constructor)
      return; // sigma0 carries no event
    const std::string& name = call.args[0]->text;
    auto tag = events_->tag_of(name);
    if (!tag)
      throw ModelError(ModelError::Kind::Internal, "event '" + name + "' missing from the event set", call.span);
    st.tag = ite(st.active, mk_event(*tag), st.tag);
    for (std::size_t i = 0; i < 4; ++i) {
      Term v = i < values.size() ? values[i] : mk_bv(0, w_);
      st.args[i] = ite(st.active, v, st.args[i]);
    }
  }

  const ContractAst& ast_;
  unsigned w_;
  const model::AddrDomain& addrs_;
  const model::SlotLayout& layout_;
  const EventSet* events_;
  Mode mode_;
};

void collect_emits(const Stmt* s, std::set<std::string>& out)
{
  if (!s)
    return;
  std::function<void(const Expr&)> walk = [&](const Expr& e) {
    if (e.kind == ExprKind::Call && e.ref == RefKind::Event)
      out.insert(e.target.empty() ? e.args[0]->text : e.target);
    for (const auto& a : e.args)
      walk(*a);
  };
  if (s->kind == StmtKind::Emit)
    out.insert(s->expr->args[0]->text);
  else if (s->expr)
    walk(*s->expr);
  for (const auto& c : s->stmts)
    collect_emits(c.get(), out);
  collect_emits(s->then.get(), out);
  collect_emits(s->els.get(), out);
  collect_emits(s->init.get(), out);
}

} // namespace

EventSet collect_events(const ContractAst& ast)
{
  std::set<std::string> used;
  for (const auto& f : ast.functions)
    collect_emits(f.body.get(), used);
  EventSet set;
  for (const auto& ev : ast.events) {
    if (used.count(ev.name))
      set.events.push_back(&ev);
  }
  return set;
}

TransitionFn build_transition(const FunDecl& f, const ContractAst& ast, const model::ModelConfig& cfg,
                              const model::AddrDomain& addrs, const model::SlotLayout& layout,
                              const EventSet& events)
{
  unsigned w = cfg.intWidth;
  if (max_emits_per_path(f, ast) > 1)
    throw ModelError(ModelError::Kind::MultiEmit, "function '" + f.name + "' may emit more than one event", f.span);
  FunDecl inlined = inline_internal_calls(f, ast);

  TransitionFn t;
  t.fname = f.name;
  t.payable = f.payable;
  for (const auto& p : f.params)
    t.params.push_back(param_info(p, ast));

  SymState st;
  for (std::size_t i = 0; i < layout.size(); ++i)
    st.slots.push_back(mk_var({InputKind::Slot, static_cast<unsigned>(i), {}}, sort_for(layout[i].sort, w)));
  for (unsigned a = 0; a < addrs.size(); ++a)
    st.balances.push_back(mk_var({InputKind::Balance, a, {}}, Sort::bv(w)));
  st.alive = mk_var({InputKind::Alive, 0, {}}, Sort::boolean());
  st.tag = mk_event(0);
  for (auto& a : st.args)
    a = mk_bv(0, w);
  st.active = mk_bool(true);

  std::vector<Term> base;
  base.push_back(st.alive);
  Term value = mk_var({InputKind::Value, 0, {}}, Sort::bv(w));
  Term sender = mk_var({InputKind::Sender, 0, {}}, Sort::addr());
  if (!f.payable)
    base.push_back(eq(value, mk_bv(0, w)));
  base.push_back(not_(eq(sender, mk_addr(addrs.contract()))));

  Executor ex(ast, cfg, addrs, layout, &events, Executor::Mode::Transaction);
  base.push_back(uge(ex.balance_of(sender, st), value));
  for (std::size_t i = 0; i < t.params.size(); ++i) {
    const ParamInfo& p = t.params[i];
    Term v = mk_var({InputKind::Arg, static_cast<unsigned>(i), {}}, sort_for(p.sort, w));
    if (p.sort == ScalarSort::Enum && Word(p.enumSize) <= width_mask(w))
      base.push_back(ult(v, mk_bv(p.enumSize, w)));
    if (!p.name.empty())
      st.locals[p.name] = v;
  }
  if (f.payable) {
    ex.credit(sender, value, st, /*debit=*/true);
    ex.credit(mk_addr(addrs.contract()), value, st);
  }
  if (inlined.body)
    ex.exec(*inlined.body, st, mk_bool(true));

  base.insert(base.end(), ex.safety.begin(), ex.safety.end());
  t.pre = and_(std::move(base));
  t.slots = std::move(st.slots);
  t.balances = std::move(st.balances);
  t.alive = st.alive;
  t.eventTag = st.tag;
  t.eventArgs = st.args;
  t.blocktime = mk_var({InputKind::Time, 0, {}}, Sort::bv(w));
  return t;
}

InitialStateSpec build_initial(const ContractAst& ast, const model::ModelConfig& cfg, const model::AddrDomain& addrs,
                               const model::SlotLayout& layout)
{
  unsigned w = cfg.intWidth;
  InitialStateSpec spec;
  SymState st;
  for (std::size_t i = 0; i < layout.size(); ++i)
    st.slots.push_back(zero_of(layout[i].sort, w));
  for (unsigned a = 0; a < addrs.size(); ++a)
    st.balances.push_back(mk_var({InputKind::Balance, a, {}}, Sort::bv(w)));
  st.alive = mk_bool(true);
  st.tag = mk_event(0);
  for (auto& a : st.args)
    a = mk_bv(0, w);
  st.active = mk_bool(true);

  Executor ex(ast, cfg, addrs, layout, nullptr, Executor::Mode::Constructor);
  for (const auto& v : ast.stateVars) {
    if (v.isConstant || !v.initializer)
      continue;
    auto [first, count] = layout.range_of(v.name);
    if (count != 1)
      throw ModelError(ModelError::Kind::Unsupported, "initializer for a composite state variable", v.span);
    st.slots[first] = ex.eval(*v.initializer, st, mk_bool(true));
  }
  if (ast.ctor) {
    spec.payable = ast.ctor->payable;
    for (std::size_t i = 0; i < ast.ctor->params.size(); ++i) {
      ParamInfo p = param_info(ast.ctor->params[i], ast);
      spec.ctorParams.push_back(p);
      if (!p.name.empty())
        st.locals[p.name] = mk_var({InputKind::CtorParam, static_cast<unsigned>(i), {}}, sort_for(p.sort, w));
    }
    FunDecl inlined = inline_internal_calls(*ast.ctor, ast);
    if (inlined.body)
      ex.exec(*inlined.body, st, mk_bool(true));
  }
  spec.varInit = st.slots;

  std::vector<Term> c;
  for (std::size_t i = 0; i < layout.size(); ++i)
    c.push_back(eq(mk_var({InputKind::Slot, static_cast<unsigned>(i), {}}, sort_for(layout[i].sort, w)), spec.varInit[i]));
  c.push_back(mk_var({InputKind::Alive, 0, {}}, Sort::boolean()));
  c.push_back(eq(mk_var({InputKind::EventTag, 0, {}}, Sort::event()), mk_event(0)));
  for (unsigned i = 0; i < 4; ++i)
    c.push_back(eq(mk_var({InputKind::EventArg, i, {}}, Sort::bv(w)), mk_bv(0, w)));
  // the total supply fits in W bits, so no balance can wrap around
  unsigned extra = 1;
  while ((std::size_t(1) << extra) < addrs.size())
    ++extra;
  Term sum = mk_bv(0, w + extra);
  for (unsigned a = 0; a < addrs.size(); ++a)
    sum = add(sum, zext(mk_var({InputKind::Balance, a, {}}, Sort::bv(w)), extra));
  c.push_back(ule(sum, zext(mk_bv(width_mask(w), w), extra)));
  spec.constraint = and_(std::move(c));
  return spec;
}

ContractModel build_model(const ContractAst& ast, const model::ModelConfig& cfg)
{
  cfg.validate();
  ContractModel m;
  m.ast = &ast;
  m.cfg = cfg;
  m.addrs = model::build_addr_domain(cfg);
  m.layout = model::SlotLayout(ast, m.addrs);
  for (const auto& en : ast.enums) {
    if (Word(en.members.size()) > width_mask(cfg.intWidth) + 1)
      throw model::ConfigError("enum '" + en.name + "' does not fit in " + std::to_string(cfg.intWidth) + " bits");
  }
  if (m.addrs.size() > width_mask(cfg.intWidth) + 1)
    throw model::ConfigError("address ordinals do not fit in " + std::to_string(cfg.intWidth) + " bits");
  m.events = collect_events(ast);
  for (const auto* f : ast.public_functions())
    m.functions.push_back(build_transition(*f, ast, cfg, m.addrs, m.layout, m.events));
  m.init = build_initial(ast, cfg, m.addrs, m.layout);
  return m;
}

std::string input_name(const Input& in, const ContractModel& m, const std::vector<ParamInfo>* params)
{
  switch (in.kind) {
  case InputKind::Slot:
    return m.layout[in.index].name;
  case InputKind::Alive:
    return "@alive";
  case InputKind::EventTag:
    return "@event";
  case InputKind::EventArg:
    return "@arg" + std::to_string(in.index);
  case InputKind::Balance:
    return "@balance[" + m.addrs.name(in.index) + "]";
  case InputKind::Blocktime:
    return "@blocktime";
  case InputKind::Value:
    return "msg.value";
  case InputKind::Sender:
    return "msg.sender";
  case InputKind::Time:
    return "now";
  case InputKind::Arg:
    return params && in.index < params->size() ? "arg:" + (*params)[in.index].name : "arg" + std::to_string(in.index);
  case InputKind::CtorParam:
    return in.index < m.init.ctorParams.size() ? "ctor:" + m.init.ctorParams[in.index].name
                                               : "ctor" + std::to_string(in.index);
  case InputKind::Named:
    return in.name;
  }
  return "?";
}

std::string dump_model(const ContractModel& m)
{
  std::ostringstream os;
  auto sexpr = [&](const Term& t, const std::vector<ParamInfo>* params) {
    return to_sexpr(t, [&](const Input& in) { return "|" + input_name(in, m, params) + "|"; });
  };
  os << "(model " << m.ast->name << " :int-width " << m.width() << "\n";
  os << "  (addresses";
  for (const auto& n : m.addrs.names())
    os << " " << n;
  os << ")\n  (events NoEvent";
  for (const auto* ev : m.events.events)
    os << " " << ev->name;
  os << ")\n  (slots";
  for (const auto& s : m.layout.slots())
    os << " |" << s.name << "|";
  os << ")\n";
  os << "  (init\n    (constraint " << sexpr(m.init.constraint, nullptr) << "))\n";
  for (const auto& f : m.functions) {
    os << "  (transition " << f.fname << (f.payable ? " :payable" : "") << "\n    (params";
    for (const auto& p : f.params)
      os << " (" << p.name << " " << p.type.str() << ")";
    os << ")\n    (pre " << sexpr(f.pre, &f.params) << ")\n";
    for (std::size_t i = 0; i < f.slots.size(); ++i)
      os << "    (update |" << m.layout[i].name << "| " << sexpr(f.slots[i], &f.params) << ")\n";
    for (std::size_t a = 0; a < f.balances.size(); ++a)
      os << "    (update |@balance[" << m.addrs.name(static_cast<unsigned>(a)) << "]| " << sexpr(f.balances[a], &f.params)
         << ")\n";
    os << "    (update |@alive| " << sexpr(f.alive, &f.params) << ")\n";
    os << "    (update |@event| " << sexpr(f.eventTag, &f.params) << ")\n";
    for (std::size_t i = 0; i < 4; ++i)
      os << "    (update |@arg" << i << "| " << sexpr(f.eventArgs[i], &f.params) << ")\n";
    os << "    (update |@blocktime| " << sexpr(f.blocktime, &f.params) << "))\n";
  }
  os << ")\n";
  return os.str();
}

} // namespace solbmc::symexec
