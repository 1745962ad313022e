#include "solbmc/interp.hpp"

#include <map>
#include <optional>
#include <random>
#include <sstream>

namespace solbmc::interp {

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
using model::SystemState;
using model::TxParams;

std::string_view reason_name(RevertReason r)
{
  switch (r) {
  case RevertReason::NotAlive:
    return "contract is destroyed";
  case RevertReason::NotPayable:
    return "value sent to a non-payable function";
  case RevertReason::SelfCall:
    return "call from the contract address";
  case RevertReason::InsufficientFunds:
    return "sender cannot pay msg.value";
  case RevertReason::BadArgument:
    return "argument out of range";
  case RevertReason::Require:
    return "require failed";
  case RevertReason::Assert:
    return "assert failed";
  case RevertReason::Revert:
    return "revert";
  case RevertReason::Throw:
    return "throw";
  case RevertReason::DivisionByZero:
    return "division by zero";
  case RevertReason::ZeroModulus:
    return "addmod/mulmod with zero modulus";
  case RevertReason::TransferFailed:
    return "transfer exceeds the contract balance";
  case RevertReason::IndexOutOfBounds:
    return "array index out of bounds";
  case RevertReason::EnumConversion:
    return "invalid enum conversion";
  }
  return "?";
}

namespace {

struct RevertSignal {
  RevertReason reason;
};
struct HaltSignal {};

std::size_t flat_size(const SolType& t, std::size_t addrCount)
{
  switch (t.kind) {
  case TypeKind::Mapping:
    return addrCount * flat_size(*t.elem, addrCount);
  case TypeKind::StaticArray:
    return t.length * flat_size(*t.elem, addrCount);
  default:
    return 1;
  }
}

class Machine {
public:
  Machine(const Interpreter& in, SystemState& st, bool ctorMode, Word now, Word value, unsigned sender)
      : in_(in), ast_(in.ast()), w_(in.width()), st_(st), ctor_(ctorMode), now_(now), value_(value),
        sender_(sender)
  {
  }

  void run_body(const FunDecl& f, const std::vector<Word>& args)
  {
    frames_.emplace_back();
    for (std::size_t i = 0; i < f.params.size() && i < args.size(); ++i)
      frames_.back().locals[f.params[i].name] = args[i];
    if (f.body)
      exec(*f.body);
    frames_.pop_back();
  }

  void run_initializers()
  {
    frames_.emplace_back();
    for (const auto& v : ast_.stateVars) {
      if (v.isConstant || !v.initializer)
        continue;
      st_.vars.at(in_.layout().range_of(v.name).first) = eval(*v.initializer);
    }
    frames_.pop_back();
  }

private:
  struct Frame {
    std::map<std::string, Word> locals;
    std::optional<Word> ret;
  };

  struct Loc {
    bool local = false;
    std::string name;
    std::size_t slot = 0;
    SolType type;
  };

  enum class Flow { Normal, Return };

  Word wrap(const Word& x) const { return solbmc::wrap(x, w_); }

  [[noreturn]] void revert(RevertReason r) const { throw RevertSignal{r}; }

  Flow exec(const Stmt& s)
  {
    switch (s.kind) {
    case StmtKind::Block:
      for (const auto& c : s.stmts) {
        if (exec(*c) == Flow::Return)
          return Flow::Return;
      }
      return Flow::Normal;
    case StmtKind::VarDecl:
      frames_.back().locals[s.name] = s.expr ? eval(*s.expr) : Word(0);
      return Flow::Normal;
    case StmtKind::Expr:
      eval(*s.expr);
      return Flow::Normal;
    case StmtKind::If:
      if (eval(*s.expr) != 0)
        return exec(*s.then);
      if (s.els)
        return exec(*s.els);
      return Flow::Normal;
    case StmtKind::Return:
      frames_.back().ret = s.expr ? std::optional<Word>(eval(*s.expr)) : std::nullopt;
      return Flow::Return;
    case StmtKind::Emit:
      emit(*s.expr);
      return Flow::Normal;
    case StmtKind::Throw:
      revert(RevertReason::Throw);
    default:
      throw InterpError("statement outside the subset at line " + std::to_string(s.span.line));
    }
  }

  Loc locate(const Expr& e)
  {
    if (e.kind == ExprKind::Ident && (e.ref == RefKind::Local || e.ref == RefKind::Param))
      return Loc{true, e.text, 0, e.type};
    if (e.kind == ExprKind::Ident && e.ref == RefKind::StateVar) {
      const auto* v = ast_.find_state_var(e.text);
      if (!v || v->isConstant)
        throw InterpError("'" + e.text + "' is not assignable storage");
      return Loc{false, e.text, in_.layout().range_of(e.text).first, v->type};
    }
    if (e.kind == ExprKind::Index) {
      Loc base = locate(*e.args[0]);
      Word idx = eval(*e.args[1]);
      if (base.local)
        throw InterpError("indexing a local value");
      const SolType& bt = base.type;
      std::size_t elem = flat_size(*bt.elem, in_.addrs().size());
      if (bt.kind == TypeKind::Mapping) {
        if (idx >= in_.addrs().size())
          throw InterpError("mapping key outside the address domain");
        return Loc{false, {}, base.slot + static_cast<std::size_t>(idx) * elem, *bt.elem};
      }
      if (bt.kind == TypeKind::StaticArray) {
        if (idx >= bt.length)
          revert(RevertReason::IndexOutOfBounds);
        return Loc{false, {}, base.slot + static_cast<std::size_t>(idx) * elem, *bt.elem};
      }
    }
    throw InterpError("unsupported storage access at line " + std::to_string(e.span.line));
  }

  Word read(const Loc& l)
  {
    if (l.local) {
      auto& locals = frames_.back().locals;
      auto it = locals.find(l.name);
      if (it == locals.end())
        throw InterpError("unbound local '" + l.name + "'");
      return it->second;
    }
    if (!l.type.is_scalar())
      throw InterpError("composite value read as a scalar");
    return st_.vars.at(l.slot);
  }

  void write(const Loc& l, const Word& v)
  {
    if (l.local) {
      frames_.back().locals[l.name] = v;
      return;
    }
    std::size_t n = flat_size(l.type, in_.addrs().size());
    for (std::size_t k = 0; k < n; ++k)
      st_.vars.at(l.slot + k) = n == 1 ? v : Word(0);
  }

  Word arith(const std::string& op, const Word& a, const Word& b)
  {
    if (op == "+")
      return wrap(a + b);
    if (op == "-")
      return wrap(a - b);
    if (op == "*")
      return wrap(a * b);
    if (op == "/" || op == "%") {
      if (b == 0)
        revert(RevertReason::DivisionByZero);
      return op == "/" ? a / b : a % b;
    }
    throw InterpError("operator '" + op + "' outside the subset");
  }

  Word eval(const Expr& e)
  {
    switch (e.kind) {
    case ExprKind::Number:
      return wrap(e.value);
    case ExprKind::BoolLit:
      return e.text == "true" ? 1 : 0;
    case ExprKind::Ident:
      switch (e.ref) {
      case RefKind::Local:
      case RefKind::Param:
        return read(locate(e));
      case RefKind::StateVar: {
        const auto* v = ast_.find_state_var(e.text);
        if (v->isConstant)
          return v->initializer ? eval(*v->initializer) : Word(0);
        return read(locate(e));
      }
      case RefKind::Now:
        return now_;
      case RefKind::This:
        return in_.addrs().contract();
      default:
        break;
      }
      break;
    case ExprKind::Member:
      switch (e.ref) {
      case RefKind::MsgSender:
        return sender_;
      case RefKind::MsgValue:
        return value_;
      case RefKind::Now:
        return now_;
      case RefKind::EnumValue:
        return e.value;
      case RefKind::Balance:
        return st_.balances.at(static_cast<std::size_t>(eval(*e.args[0])));
      case RefKind::Builtin:
        if (e.builtin == Builtin::Length && e.args[0]->type.kind == TypeKind::StaticArray)
          return wrap(e.args[0]->type.length);
        break;
      default:
        break;
      }
      break;
    case ExprKind::Index:
      return read(locate(e));
    case ExprKind::Call:
      return call(e);
    case ExprKind::TypeConv: {
      const Expr& x = *e.args[0];
      if (e.convType.kind == TypeKind::Address && x.kind == ExprKind::Number && x.value == 0)
        return in_.addrs().no_addr();
      return eval(x);
    }
    case ExprKind::Unary: {
      const std::string& op = e.text;
      if (op == "!")
        return eval(*e.args[0]) == 0 ? 1 : 0;
      if (op == "-")
        return wrap(Word(0) - eval(*e.args[0]));
      if (op == "++" || op == "--") {
        Loc l = locate(*e.args[0]);
        Word old = read(l);
        Word nv = wrap(op == "++" ? old + 1 : old - 1);
        write(l, nv);
        return e.postfix ? old : nv;
      }
      if (op == "delete") {
        write(locate(*e.args[0]), 0);
        return 0;
      }
      break;
    }
    case ExprKind::Binary: {
      const std::string& op = e.text;
      if (op == "&&")
        return eval(*e.args[0]) != 0 && eval(*e.args[1]) != 0 ? 1 : 0;
      if (op == "||")
        return eval(*e.args[0]) != 0 || eval(*e.args[1]) != 0 ? 1 : 0;
      Word a = eval(*e.args[0]);
      Word b = eval(*e.args[1]);
      if (op == "==")
        return a == b;
      if (op == "!=")
        return a != b;
      if (op == "<")
        return a < b;
      if (op == "<=")
        return a <= b;
      if (op == ">")
        return a > b;
      if (op == ">=")
        return a >= b;
      return arith(op, a, b);
    }
    case ExprKind::Ternary:
      return eval(*e.args[0]) != 0 ? eval(*e.args[1]) : eval(*e.args[2]);
    case ExprKind::Assign: {
      Loc l = locate(*e.args[0]);
      Word v = eval(*e.args[1]);
      if (e.text != "=")
        v = arith(e.text.substr(0, e.text.size() - 1), read(l), v);
      write(l, v);
      return v;
    }
    default:
      break;
    }
    throw InterpError("expression outside the subset at line " + std::to_string(e.span.line));
  }

  Word call(const Expr& e)
  {
    if (e.ref == RefKind::Event) {
      emit(e);
      return 0;
    }
    if (e.ref == RefKind::EnumType) {
      Word x = eval(*e.args[1]);
      const auto* en = ast_.find_enum(e.target);
      if (x >= en->members.size())
        revert(RevertReason::EnumConversion);
      return x;
    }
    switch (e.builtin) {
    case Builtin::Require:
      if (eval(*e.args[1]) == 0)
        revert(RevertReason::Require);
      return 0;
    case Builtin::Assert:
      if (eval(*e.args[1]) == 0)
        revert(RevertReason::Assert);
      return 0;
    case Builtin::Revert:
      revert(RevertReason::Revert);
    case Builtin::AddMod:
    case Builtin::MulMod: {
      WideWord a = WideWord(eval(*e.args[1]));
      WideWord b = WideWord(eval(*e.args[2]));
      WideWord m = WideWord(eval(*e.args[3]));
      if (m == 0)
        revert(RevertReason::ZeroModulus);
      WideWord r = e.builtin == Builtin::AddMod ? (a + b) % m : (a * b) % m;
      return Word(r);
    }
    case Builtin::Transfer: {
      if (ctor_)
        throw InterpError("transfer in a constructor");
      Word to = eval(*e.args[0]->args[0]);
      Word amount = eval(*e.args[1]);
      std::size_t c = in_.addrs().contract();
      if (st_.balances[c] < amount)
        revert(RevertReason::TransferFailed);
      st_.balances[c] = wrap(st_.balances[c] - amount);
      auto t = static_cast<std::size_t>(to);
      st_.balances.at(t) = wrap(st_.balances[t] + amount);
      return 0;
    }
    case Builtin::Selfdestruct: {
      if (ctor_)
        throw InterpError("selfdestruct in a constructor");
      Word to = eval(*e.args[1]);
      std::size_t c = in_.addrs().contract();
      Word amount = st_.balances[c];
      st_.alive = false;
      st_.balances[c] = 0;
      auto t = static_cast<std::size_t>(to);
      st_.balances.at(t) = wrap(st_.balances[t] + amount);
      throw HaltSignal{};
    }
    case Builtin::None:
      if (e.ref == RefKind::Function) {
        const FunDecl* g = ast_.find_function(e.target);
        if (!g)
          throw InterpError("unknown function '" + e.target + "'");
        std::vector<Word> args;
        for (std::size_t i = 1; i < e.args.size(); ++i)
          args.push_back(eval(*e.args[i]));
        if (++depth_ > 64)
          throw InterpError("call depth exceeded");
        frames_.emplace_back();
        for (std::size_t i = 0; i < g->params.size() && i < args.size(); ++i)
          frames_.back().locals[g->params[i].name] = args[i];
        if (g->body)
          exec(*g->body);
        Word r = frames_.back().ret.value_or(0);
        frames_.pop_back();
        --depth_;
        return r;
      }
      break;
    default:
      break;
    }
    throw InterpError("call outside the subset at line " + std::to_string(e.span.line));
  }

  void emit(const Expr& call)
  {
    std::vector<Word> args;
    for (std::size_t i = 1; i < call.args.size(); ++i)
      args.push_back(eval(*call.args[i]));
    if (ctor_)
      return;
    if (emitted_)
      throw InterpError("second event in one transaction");
    emitted_ = true;
    st_.event = model::EventInstance{call.args[0]->text, std::move(args)};
  }

  const Interpreter& in_;
  const ContractAst& ast_;
  unsigned w_;
  SystemState& st_;
  bool ctor_;
  Word now_;
  Word value_;
  unsigned sender_;
  std::vector<Frame> frames_;
  bool emitted_ = false;
  int depth_ = 0;
};

std::vector<Word> values_up_to(const Word& mask)
{
  if (mask > 0xffff)
    throw InterpError("domain too large to enumerate");
  std::vector<Word> out;
  for (unsigned i = 0; i <= static_cast<unsigned>(mask); ++i)
    out.push_back(i);
  return out;
}

} // namespace

Interpreter::Interpreter(const ContractAst& ast, const model::ModelConfig& cfg)
    : ast_(ast), cfg_(cfg), addrs_(model::build_addr_domain(cfg)), layout_(ast, addrs_)
{
  cfg_.validate();
}

SystemState Interpreter::construct(const model::CtorInputs& in, const std::vector<Word>& balances,
                                   const Word& blocktime) const
{
  SystemState st;
  st.vars.assign(layout_.size(), 0);
  st.alive = true;
  st.balances = balances;
  st.balances.resize(addrs_.size(), 0);
  st.blocktime = wrap(blocktime, cfg_.intWidth);
  Machine m(*this, st, true, st.blocktime, wrap(in.value, cfg_.intWidth), in.sender);
  try {
    m.run_initializers();
    if (ast_.ctor)
      m.run_body(*ast_.ctor, in.args);
  } catch (const RevertSignal& r) {
    throw InterpError("constructor reverted: " + std::string(reason_name(r.reason)));
  } catch (const HaltSignal&) {
    throw InterpError("constructor self-destructed");
  }
  st.event.reset();
  return st;
}

TxOutcome Interpreter::exec_tx(const SystemState& state, const TxParams& tx) const
{
  const FunDecl* f = ast_.find_function(tx.fname);
  if (!f || !f->is_public())
    throw InterpError("no public function '" + tx.fname + "'");
  if (tx.args.size() != f->params.size())
    throw InterpError("wrong number of arguments for '" + tx.fname + "'");
  Word mask = width_mask(cfg_.intWidth);
  if (tx.value > mask || tx.time > mask || tx.sender >= addrs_.size())
    throw InterpError("transaction parameter outside the model domain");

  TxOutcome out;
  out.state = state;
  auto reject = [&](RevertReason r) {
    out.committed = false;
    out.reason = r;
    return out;
  };
  for (std::size_t i = 0; i < tx.args.size(); ++i) {
    const SolType& t = f->params[i].type;
    Word limit = mask;
    if (t.kind == TypeKind::Bool)
      limit = 1;
    else if (t.kind == TypeKind::Address)
      limit = addrs_.size() - 1;
    if (tx.args[i] > limit)
      throw InterpError("argument " + std::to_string(i) + " outside its domain");
    if (t.kind == TypeKind::Enum && tx.args[i] >= ast_.find_enum(t.name)->members.size())
      return reject(RevertReason::BadArgument);
  }
  if (!state.alive)
    return reject(RevertReason::NotAlive);
  if (!f->payable && tx.value != 0)
    return reject(RevertReason::NotPayable);
  if (tx.sender == addrs_.contract())
    return reject(RevertReason::SelfCall);
  if (state.balances.at(tx.sender) < tx.value)
    return reject(RevertReason::InsufficientFunds);

  SystemState st = state;
  st.event.reset();
  st.blocktime = tx.time;
  if (f->payable) {
    st.balances[tx.sender] -= tx.value;
    std::size_t c = addrs_.contract();
    st.balances[c] = wrap(st.balances[c] + tx.value, cfg_.intWidth);
  }
  Machine m(*this, st, false, tx.time, tx.value, tx.sender);
  try {
    m.run_body(*f, tx.args);
  } catch (const RevertSignal& r) {
    return reject(r.reason);
  } catch (const HaltSignal&) {
  }
  out.committed = true;
  out.state = std::move(st);
  return out;
}

// ---------------------------------------------------------------------------

std::string ReplayReport::str() const
{
  std::ostringstream os;
  for (const auto& s : steps) {
    os << "step " << s.index << ": ";
    if (!s.committed)
      os << "reverted";
    else if (s.eventMatch && s.stateMatch)
      os << "ok";
    else
      os << "mismatch";
    if (!s.detail.empty())
      os << " (" << s.detail << ")";
    os << "\n";
  }
  os << (confirmed ? "Confirmed" : "Mismatch") << "\n";
  return os.str();
}

namespace {

std::string state_diff(const SystemState& got, const SystemState& want, const Interpreter& in)
{
  std::vector<std::string> parts;
  const auto& layout = in.layout();
  const auto& addrs = in.addrs();
  for (std::size_t i = 0; i < layout.size() && i < got.vars.size() && i < want.vars.size(); ++i) {
    if (got.vars[i] != want.vars[i])
      parts.push_back(layout[i].name + " is " + model::format_value(got.vars[i], layout[i].sort, addrs) +
                      ", expected " + model::format_value(want.vars[i], layout[i].sort, addrs));
  }
  if (got.vars.size() != want.vars.size())
    parts.push_back("slot count differs");
  if (got.alive != want.alive)
    parts.push_back(std::string("alive is ") + (got.alive ? "true" : "false"));
  for (std::size_t a = 0; a < addrs.size() && a < got.balances.size() && a < want.balances.size(); ++a) {
    if (got.balances[a] != want.balances[a])
      parts.push_back("balance[" + addrs.name(static_cast<unsigned>(a)) + "] is " + got.balances[a].str() +
                      ", expected " + want.balances[a].str());
  }
  if (got.blocktime != want.blocktime)
    parts.push_back("blocktime is " + got.blocktime.str() + ", expected " + want.blocktime.str());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i)
    out += (i ? "; " : "") + parts[i];
  return out;
}

bool same_contents(const SystemState& a, const SystemState& b)
{
  return a.vars == b.vars && a.alive == b.alive && a.balances == b.balances && a.blocktime == b.blocktime;
}

} // namespace

ReplayReport replay(const model::CounterExample& ce, const Interpreter& in)
{
  ReplayReport rep;
  if (ce.steps.empty())
    return rep;
  const auto& ast = in.ast();
  const auto& addrs = in.addrs();
  const SystemState& init = ce.steps[0].state;
  StepReport first;
  SystemState cur;
  if (!ce.fromInitial) {
    cur = init;
    first.detail = "starts from the recorded state";
  } else {
    try {
      cur = in.construct(ce.ctor, init.balances, init.blocktime);
      first.stateMatch = same_contents(cur, init);
      first.eventMatch = !init.event.has_value();
      if (!first.stateMatch)
        first.detail = state_diff(cur, init, in);
    } catch (const InterpError& e) {
      first.committed = false;
      first.detail = e.what();
      cur = init;
    }
  }
  rep.steps.push_back(first);

  for (std::size_t i = 1; i < ce.steps.size(); ++i) {
    StepReport sr;
    sr.index = i;
    const auto& want = ce.steps[i];
    if (!want.tx) {
      sr.committed = false;
      sr.detail = "no transaction recorded";
      rep.steps.push_back(sr);
      cur = want.state;
      continue;
    }
    try {
      TxOutcome out = in.exec_tx(cur, *want.tx);
      sr.committed = out.committed;
      if (!out.committed) {
        sr.detail = std::string(reason_name(out.reason));
      } else {
        sr.eventMatch = out.state.event == want.state.event;
        sr.stateMatch = same_contents(out.state, want.state);
        std::string d = state_diff(out.state, want.state, in);
        if (!sr.eventMatch)
          d = "event is " + model::format_event(out.state.event, ast, addrs) + ", expected " +
              model::format_event(want.state.event, ast, addrs) + (d.empty() ? "" : "; " + d);
        sr.detail = d;
      }
    } catch (const InterpError& e) {
      sr.committed = false;
      sr.detail = e.what();
    }
    rep.steps.push_back(sr);
    cur = want.state;
  }
  rep.confirmed = true;
  for (const auto& s : rep.steps)
    rep.confirmed = rep.confirmed && s.committed && s.eventMatch && s.stateMatch;
  return rep;
}

std::vector<Word> domain_of(const SolType& t, const Interpreter& in)
{
  switch (t.kind) {
  case TypeKind::Bool:
    return {0, 1};
  case TypeKind::Address: {
    std::vector<Word> out;
    for (unsigned a = 0; a < in.addrs().size(); ++a)
      out.push_back(a);
    return out;
  }
  default:
    return values_up_to(width_mask(in.width()));
  }
}

namespace {

void for_each_args(const std::vector<std::vector<Word>>& domains, const std::function<void(const std::vector<Word>&)>& fn)
{
  std::vector<Word> cur(domains.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == domains.size()) {
      fn(cur);
      return;
    }
    for (const auto& v : domains[i]) {
      cur[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
}

} // namespace

std::set<SystemState> enumerate_reachable(const Interpreter& in, const SystemState& init, unsigned k)
{
  std::set<SystemState> seen{init};
  Word mask = width_mask(in.width());
  std::vector<Word> values = values_up_to(mask);
  std::set<std::pair<SystemState, bool>> frontier{{init, true}};
  for (unsigned step = 0; step < k && !frontier.empty(); ++step) {
    std::set<std::pair<SystemState, bool>> next;
    for (const auto& [st, first] : frontier) {
      for (const auto* f : in.ast().public_functions()) {
        std::vector<std::vector<Word>> domains;
        for (const auto& p : f->params)
          domains.push_back(domain_of(p.type, in));
        for (const auto& v : values) {
          if (!f->payable && v != 0)
            continue;
          for (unsigned s = 1; s <= in.addrs().user_count(); ++s) {
            for (Word t = first ? st.blocktime : st.blocktime + 1; t <= mask; ++t) {
              for_each_args(domains, [&](const std::vector<Word>& args) {
                TxOutcome out = in.exec_tx(st, TxParams{f->name, v, s, t, args});
                if (!out.committed)
                  return;
                seen.insert(out.state);
                next.emplace(out.state, false);
              });
            }
          }
        }
      }
    }
    frontier = std::move(next);
  }
  return seen;
}

FuzzReport fuzz(const Interpreter& in, const FuzzOptions& opt,
                const std::function<std::string(const SystemState&)>& check)
{
  FuzzReport rep;
  rep.seed = opt.seed;
  std::mt19937_64 rng(opt.seed);
  Word mask = width_mask(in.width());
  auto uniform = [&](const Word& hi) -> Word {
    // hi inclusive; small values are favored to reach interesting branches
    if (hi == 0)
      return 0;
    Word r = 0;
    for (int i = 0; i < 4; ++i)
      r = (r << 64) | Word(rng());
    if (rng() % 2 == 0 && hi > 16)
      return r % 17;
    return hi == ~Word(0) ? r : r % (hi + 1);
  };
  auto pick = [&](const SolType& t) -> Word {
    switch (t.kind) {
    case TypeKind::Bool:
      return rng() % 2;
    case TypeKind::Address:
      return rng() % in.addrs().size();
    case TypeKind::Enum:
      return rng() % (in.ast().find_enum(t.name)->members.size() + 1);
    default:
      return uniform(mask);
    }
  };
  auto fail = [&](unsigned run, unsigned step, const std::string& what) {
    rep.failures.push_back("seed " + std::to_string(opt.seed) + " run " + std::to_string(run) + " step " +
                           std::to_string(step) + ": " + what);
  };
  auto total = [](const SystemState& s) {
    WideWord sum = 0;
    for (const auto& b : s.balances)
      sum += WideWord(b);
    return sum;
  };
  auto functions = in.ast().public_functions();
  for (unsigned run = 0; run < opt.runs; ++run) {
    std::vector<Word> balances(in.addrs().size(), 0);
    Word budget = uniform(mask);
    for (auto& b : balances) {
      b = uniform(budget);
      budget -= b;
    }
    model::CtorInputs ctor;
    if (in.ast().ctor) {
      for (const auto& p : in.ast().ctor->params)
        ctor.args.push_back(pick(p.type));
    }
    ctor.sender = 1 + static_cast<unsigned>(rng() % in.addrs().user_count());
    SystemState st;
    try {
      st = in.construct(ctor, balances, uniform(mask / 2));
    } catch (const InterpError& e) {
      fail(run, 0, e.what());
      continue;
    }
    if (auto msg = check(st); !msg.empty())
      fail(run, 0, msg);
    bool first = true;
    for (unsigned step = 1; step <= opt.length && !functions.empty(); ++step) {
      const FunDecl* f = functions[rng() % functions.size()];
      TxParams tx;
      tx.fname = f->name;
      tx.sender = 1 + static_cast<unsigned>(rng() % in.addrs().user_count());
      if (f->payable && rng() % 4 != 0)
        tx.value = uniform(st.balances[tx.sender]);
      Word gap = first ? Word(rng() % 3) : Word(1 + rng() % 3);
      if (mask - st.blocktime < gap)
        break;
      tx.time = st.blocktime + gap;
      for (const auto& p : f->params)
        tx.args.push_back(pick(p.type));
      TxOutcome out;
      try {
        out = in.exec_tx(st, tx);
      } catch (const InterpError& e) {
        fail(run, step, e.what());
        break;
      }
      if (!out.committed) {
        ++rep.reverted;
        if (!(out.state == st))
          fail(run, step, "reverted transaction changed the state");
        continue;
      }
      ++rep.committed;
      if (out.state.alive && total(out.state) != total(st))
        fail(run, step, "sum of balances changed");
      if (auto msg = check(out.state); !msg.empty())
        fail(run, step, msg);
      st = std::move(out.state);
      first = false;
    }
  }
  return rep;
}

} // namespace solbmc::interp
