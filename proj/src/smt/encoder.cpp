#include "solbmc/smt.hpp"

namespace solbmc::smt {

using namespace term;
using model::ScalarSort;
using symexec::TransitionFn;

Term var(const std::string& name, Sort sort) { return mk_named(name, sort); }

std::vector<Term> StateVars::all() const
{
  std::vector<Term> out = slots;
  out.push_back(alive);
  out.push_back(tag);
  out.insert(out.end(), args.begin(), args.end());
  out.insert(out.end(), balances.begin(), balances.end());
  out.push_back(blocktime);
  return out;
}

std::vector<Term> TxVars::all() const
{
  std::vector<Term> out{fn, value, sender, time};
  out.insert(out.end(), argw.begin(), argw.end());
  out.insert(out.end(), argb.begin(), argb.end());
  out.insert(out.end(), arga.begin(), arga.end());
  return out;
}

std::vector<Term> CtorVars::all() const
{
  std::vector<Term> out = params;
  out.push_back(sender);
  out.push_back(value);
  return out;
}

namespace {

char bank_of(ScalarSort s)
{
  switch (s) {
  case ScalarSort::Bool:
    return 'b';
  case ScalarSort::Addr:
    return 'a';
  default:
    return 'w';
  }
}

} // namespace

Encoder::Encoder(const symexec::ContractModel& m) : m_(m)
{
  for (const auto& f : m.functions) {
    unsigned w = 0, b = 0, a = 0;
    std::vector<std::pair<char, unsigned>> slots;
    for (const auto& p : f.params) {
      char bank = bank_of(p.sort);
      unsigned& counter = bank == 'w' ? w : bank == 'b' ? b : a;
      slots.emplace_back(bank, counter++);
    }
    argSlot_.push_back(std::move(slots));
    bankW_ = std::max(bankW_, w);
    bankB_ = std::max(bankB_, b);
    bankA_ = std::max(bankA_, a);
  }
}

StateVars Encoder::state(unsigned i) const
{
  std::string p = "step" + std::to_string(i) + "_";
  unsigned w = m_.width();
  StateVars s;
  for (const auto& slot : m_.layout.slots())
    s.slots.push_back(var(p + slot.name, m_.sort_of(slot.sort)));
  s.alive = var(p + "@alive", Sort::boolean());
  s.tag = var(p + "@event", Sort::event());
  for (unsigned k = 0; k < 4; ++k)
    s.args[k] = var(p + "@arg" + std::to_string(k), Sort::bv(w));
  for (unsigned a = 0; a < m_.addrs.size(); ++a)
    s.balances.push_back(var(p + "@balance[" + m_.addrs.name(a) + "]", Sort::bv(w)));
  s.blocktime = var(p + "@blocktime", Sort::bv(w));
  return s;
}

TxVars Encoder::tx(unsigned i) const { return tx_vars("tx" + std::to_string(i) + "_"); }

TxVars Encoder::tx_vars(const std::string& p) const
{
  unsigned w = m_.width();
  TxVars t;
  t.fn = var(p + "fn", Sort::fn());
  t.value = var(p + "value", Sort::bv(w));
  t.sender = var(p + "sender", Sort::addr());
  t.time = var(p + "time", Sort::bv(w));
  for (unsigned k = 0; k < bankW_; ++k)
    t.argw.push_back(var(p + "argw" + std::to_string(k), Sort::bv(w)));
  for (unsigned k = 0; k < bankB_; ++k)
    t.argb.push_back(var(p + "argb" + std::to_string(k), Sort::boolean()));
  for (unsigned k = 0; k < bankA_; ++k)
    t.arga.push_back(var(p + "arga" + std::to_string(k), Sort::addr()));
  return t;
}

CtorVars Encoder::ctor() const
{
  CtorVars c;
  for (const auto& p : m_.init.ctorParams)
    c.params.push_back(var("ctor_" + p.name, m_.sort_of(p.sort)));
  c.sender = var("ctor_sender", Sort::addr());
  c.value = var("ctor_value", Sort::bv(m_.width()));
  return c;
}

Term Encoder::arg_var(const TxVars& tx, const TransitionFn& f, std::size_t p) const
{
  auto idx = m_.function_index(f.fname);
  if (!idx)
    throw std::logic_error("function '" + f.fname + "' is not part of the model");
  auto [bank, k] = argSlot_.at(*idx).at(p);
  return bank == 'w' ? tx.argw.at(k) : bank == 'b' ? tx.argb.at(k) : tx.arga.at(k);
}

Term Encoder::at(const Term& t, unsigned i, const TxVars* tx, const TransitionFn* f) const
{
  StateVars s = state(i);
  std::optional<CtorVars> c;
  return substitute(t, [&](const Input& in, const Sort&) -> std::optional<Term> {
    switch (in.kind) {
    case InputKind::Slot:
      return s.slots.at(in.index);
    case InputKind::Alive:
      return s.alive;
    case InputKind::EventTag:
      return s.tag;
    case InputKind::EventArg:
      return s.args.at(in.index);
    case InputKind::Balance:
      return s.balances.at(in.index);
    case InputKind::Blocktime:
      return s.blocktime;
    case InputKind::Value:
      if (!tx)
        break;
      return tx->value;
    case InputKind::Sender:
      if (!tx)
        break;
      return tx->sender;
    case InputKind::Time:
      if (!tx)
        break;
      return tx->time;
    case InputKind::Arg:
      if (!tx || !f)
        break;
      return arg_var(*tx, *f, in.index);
    case InputKind::CtorParam:
      if (!c)
        c = ctor();
      return c->params.at(in.index);
    case InputKind::Named:
      return std::nullopt;
    }
    throw std::logic_error("call input used outside a transaction");
  });
}

Term Encoder::pre(const TransitionFn& f, unsigned i, const TxVars& tx) const { return at(f.pre, i, &tx, &f); }

Term Encoder::transition(unsigned i) const
{
  if (auto it = transitions_.find(i); it != transitions_.end())
    return it->second;
  if (i == 0)
    throw std::logic_error("transition indices start at 1");
  TxVars t = tx(i);
  StateVars post = state(i);
  std::vector<Term> parts;
  if (m_.functions.empty()) {
    transitions_[i] = mk_bool(false);
    return transitions_[i];
  }
  // which function fires, and its precondition
  std::vector<Term> pres;
  std::vector<Term> sel;
  for (std::size_t j = 0; j < m_.functions.size(); ++j) {
    Term is = eq(t.fn, mk_fn(static_cast<unsigned>(j)));
    sel.push_back(is);
    pres.push_back(and_(is, pre(m_.functions[j], i - 1, t)));
  }
  parts.push_back(or_(pres));
  // post-state as a selector over the per-function updates
  auto select = [&](const std::function<Term(const TransitionFn&)>& get) {
    std::size_t n = m_.functions.size();
    Term r = at(get(m_.functions[n - 1]), i - 1, &t, &m_.functions[n - 1]);
    for (std::size_t j = n - 1; j-- > 0;)
      r = ite(sel[j], at(get(m_.functions[j]), i - 1, &t, &m_.functions[j]), r);
    return r;
  };
  for (std::size_t s = 0; s < post.slots.size(); ++s)
    parts.push_back(eq(post.slots[s], select([&](const TransitionFn& f) { return f.slots[s]; })));
  parts.push_back(eq(post.alive, select([](const TransitionFn& f) { return f.alive; })));
  parts.push_back(eq(post.tag, select([](const TransitionFn& f) { return f.eventTag; })));
  for (std::size_t k = 0; k < 4; ++k)
    parts.push_back(eq(post.args[k], select([&](const TransitionFn& f) { return f.eventArgs[k]; })));
  for (std::size_t a = 0; a < post.balances.size(); ++a)
    parts.push_back(eq(post.balances[a], select([&](const TransitionFn& f) { return f.balances[a]; })));
  parts.push_back(eq(post.blocktime, t.time));
  transitions_[i] = and_(std::move(parts));
  return transitions_[i];
}

std::vector<Term> Encoder::transition_disjuncts(unsigned i) const
{
  TxVars t = tx(i);
  StateVars post = state(i);
  std::vector<Term> out;
  for (std::size_t j = 0; j < m_.functions.size(); ++j) {
    const auto& f = m_.functions[j];
    std::vector<Term> c{eq(t.fn, mk_fn(static_cast<unsigned>(j))), pre(f, i - 1, t)};
    for (std::size_t s = 0; s < post.slots.size(); ++s)
      c.push_back(eq(post.slots[s], at(f.slots[s], i - 1, &t, &f)));
    c.push_back(eq(post.alive, at(f.alive, i - 1, &t, &f)));
    c.push_back(eq(post.tag, at(f.eventTag, i - 1, &t, &f)));
    for (std::size_t k = 0; k < 4; ++k)
      c.push_back(eq(post.args[k], at(f.eventArgs[k], i - 1, &t, &f)));
    for (std::size_t a = 0; a < post.balances.size(); ++a)
      c.push_back(eq(post.balances[a], at(f.balances[a], i - 1, &t, &f)));
    c.push_back(eq(post.blocktime, at(f.blocktime, i - 1, &t, &f)));
    out.push_back(and_(std::move(c)));
  }
  return out;
}

Term Encoder::path(unsigned k) const
{
  std::vector<Term> parts;
  for (unsigned i = 1; i <= k; ++i)
    parts.push_back(transition(i));
  return and_(std::move(parts));
}

Term Encoder::initial() const
{
  StateVars s = state(0);
  CtorVars c = ctor();
  Term init = substitute(m_.init.constraint, [&](const Input& in, const Sort&) -> std::optional<Term> {
    switch (in.kind) {
    case InputKind::Slot:
      return s.slots.at(in.index);
    case InputKind::Alive:
      return s.alive;
    case InputKind::EventTag:
      return s.tag;
    case InputKind::EventArg:
      return s.args.at(in.index);
    case InputKind::Balance:
      return s.balances.at(in.index);
    case InputKind::Blocktime:
    case InputKind::Time:
      return s.blocktime;
    case InputKind::Value:
      return c.value;
    case InputKind::Sender:
      return c.sender;
    case InputKind::CtorParam:
      return c.params.at(in.index);
    default:
      return std::nullopt;
    }
  });
  // the contract is deployed by a user
  return and_({init, not_(eq(c.sender, mk_addr(m_.addrs.contract()))), not_(eq(c.sender, mk_addr(m_.addrs.no_addr())))});
}

Term Encoder::time_monotonic(unsigned k) const
{
  std::vector<Term> parts;
  for (unsigned i = 1; i <= k; ++i) {
    Term now = tx(i).time;
    if (i == 1)
      parts.push_back(uge(now, state(0).blocktime));
    else
      parts.push_back(ugt(now, tx(i - 1).time));
  }
  return and_(std::move(parts));
}

Term Encoder::no_self_call(unsigned k) const
{
  std::vector<Term> parts;
  for (unsigned i = 1; i <= k; ++i) {
    Term s = tx(i).sender;
    parts.push_back(not_(eq(s, mk_addr(m_.addrs.contract()))));
    parts.push_back(not_(eq(s, mk_addr(m_.addrs.no_addr()))));
  }
  return and_(std::move(parts));
}

Term Encoder::total_balance(unsigned i) const
{
  unsigned extra = 0;
  while ((std::size_t{1} << extra) < m_.addrs.size())
    ++extra;
  StateVars s = state(i);
  Term sum = mk_bv(0, m_.width() + extra);
  for (const auto& b : s.balances)
    sum = add(sum, zext(b, extra));
  return sum;
}

Term Encoder::conserved(unsigned i) const { return eq(total_balance(i), total_balance(i - 1)); }

Term Encoder::supply_bounded(unsigned i) const
{
  Term sum = total_balance(i);
  return ule(sum, zext(mk_bv(width_mask(m_.width()), m_.width()), sum->sort.width - m_.width()));
}

Term Encoder::conservation_violation() const
{
  return and_({supply_bounded(0), transition(1), not_(conserved(1))});
}

Term Encoder::side_constraints(unsigned k) const { return and_({time_monotonic(k), no_self_call(k), initial()}); }

std::vector<Term> Encoder::trace_vars(unsigned k) const
{
  std::vector<Term> out = ctor().all();
  for (unsigned i = 0; i <= k; ++i) {
    auto s = state(i).all();
    out.insert(out.end(), s.begin(), s.end());
    if (i > 0) {
      auto t = tx(i).all();
      out.insert(out.end(), t.begin(), t.end());
    }
  }
  return out;
}

namespace {

Word value_of(const std::map<std::string, Word>& v, const Term& t)
{
  auto it = v.find(t->input.name);
  if (it == v.end())
    throw std::out_of_range("no value for '" + t->input.name + "'");
  return it->second;
}

} // namespace

model::SystemState Encoder::decode_state(const std::map<std::string, Word>& v, unsigned i) const
{
  StateVars s = state(i);
  model::SystemState st;
  for (const auto& x : s.slots)
    st.vars.push_back(value_of(v, x));
  st.alive = value_of(v, s.alive) != 0;
  auto tag = static_cast<unsigned>(value_of(v, s.tag));
  if (tag != 0) {
    model::EventInstance ev;
    ev.tag = m_.events.name_of(tag);
    const auto* decl = m_.events.events.at(tag - 1);
    for (std::size_t k = 0; k < decl->params.size(); ++k)
      ev.args.push_back(value_of(v, s.args[k]));
    st.event = ev;
  }
  for (const auto& b : s.balances)
    st.balances.push_back(value_of(v, b));
  st.blocktime = value_of(v, s.blocktime);
  return st;
}

model::TxParams Encoder::decode_tx(const std::map<std::string, Word>& v, unsigned i) const
{
  TxVars t = tx(i);
  return decode_call(v, t, m_.functions.at(static_cast<std::size_t>(value_of(v, t.fn))));
}

model::TxParams Encoder::decode_call(const std::map<std::string, Word>& v, const TxVars& t,
                                     const TransitionFn& f) const
{
  model::TxParams tx;
  tx.fname = f.fname;
  tx.value = value_of(v, t.value);
  tx.sender = static_cast<unsigned>(value_of(v, t.sender));
  tx.time = value_of(v, t.time);
  for (std::size_t p = 0; p < f.params.size(); ++p)
    tx.args.push_back(value_of(v, arg_var(t, f, p)));
  return tx;
}

model::CounterExample Encoder::decode(const std::map<std::string, Word>& v, unsigned k) const
{
  model::CounterExample ce;
  CtorVars c = ctor();
  for (const auto& p : c.params)
    ce.ctor.args.push_back(value_of(v, p));
  ce.ctor.sender = static_cast<unsigned>(value_of(v, c.sender));
  ce.ctor.value = value_of(v, c.value);
  for (unsigned i = 0; i <= k; ++i) {
    model::TraceStep step;
    if (i > 0)
      step.tx = decode_tx(v, i);
    step.state = decode_state(v, i);
    ce.steps.push_back(std::move(step));
  }
  return ce;
}

} // namespace solbmc::smt
