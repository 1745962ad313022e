#include "solbmc/speclang.hpp"

#include <stdexcept>

namespace solbmc::spec {

using namespace term;
using model::ScalarSort;

namespace {

Sort sort_of(PType t, unsigned w)
{
  switch (t) {
  case PType::Bool:
    return Sort::boolean();
  case PType::Addr:
    return Sort::addr();
  default:
    return Sort::bv(w);
  }
}

Term to_bv(const Term& t, PType type, const symexec::ContractModel& m)
{
  switch (type) {
  case PType::Bool:
    return symexec::bool_to_bv(t, m.width());
  case PType::Addr:
    return symexec::addr_to_bv(t, m.addrs.size(), m.width());
  default:
    return t;
  }
}

class Lowerer {
public:
  Lowerer(const symexec::ContractModel& m, std::map<std::string, Term> binders) : m_(m), binders_(std::move(binders)) {}

  Term lower(const Pred& p)
  {
    unsigned w = m_.width();
    switch (p.kind) {
    case PKind::Number:
      return mk_bv(p.value, w);
    case PKind::BoolLit:
      return mk_bool(p.value != 0);
    case PKind::AddrLit:
      return mk_addr(static_cast<unsigned>(p.value));
    case PKind::Alive:
      return mk_var({InputKind::Alive, 0, {}}, Sort::boolean());
    case PKind::Blocktime:
      return mk_var({InputKind::Blocktime, 0, {}}, Sort::bv(w));
    case PKind::MsgSender:
      return mk_var({InputKind::Sender, 0, {}}, Sort::addr());
    case PKind::MsgValue:
      return mk_var({InputKind::Value, 0, {}}, Sort::bv(w));
    case PKind::Param:
      return mk_var({InputKind::Arg, static_cast<unsigned>(p.value), {}}, sort_of(p.type, w));
    case PKind::Binder: {
      auto it = binders_.find(p.name);
      if (it == binders_.end())
        throw std::logic_error("unbound binder '" + p.name + "'");
      return it->second;
    }
    case PKind::Balance: {
      Term a = lower(*p.args[0]);
      Term out = mk_bv(0, w);
      for (unsigned i = 0; i < m_.addrs.size(); ++i)
        out = ite(eq(a, mk_addr(i)), mk_var({InputKind::Balance, i, {}}, Sort::bv(w)), out);
      return out;
    }
    case PKind::StateVar:
      return state_var(p);
    case PKind::Sum: {
      Term out = mk_bv(0, w);
      auto saved = binders_.find(p.name) != binders_.end() ? std::optional<Term>(binders_[p.name]) : std::nullopt;
      for (unsigned a = 0; a < m_.addrs.size(); ++a) {
        if (p.userOnly && !m_.addrs.is_user(a))
          continue;
        binders_[p.name] = mk_addr(a);
        out = add(out, lower(*p.args[0]));
      }
      if (saved)
        binders_[p.name] = *saved;
      else
        binders_.erase(p.name);
      return out;
    }
    case PKind::Unary: {
      Term x = lower(*p.args[0]);
      return p.op == "!" ? not_(x) : neg(x);
    }
    case PKind::Binary: {
      Term a = lower(*p.args[0]);
      Term b = lower(*p.args[1]);
      const std::string& op = p.op;
      if (op == "&&")
        return and_(a, b);
      if (op == "||")
        return or_(a, b);
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
      if (op == "+")
        return add(a, b);
      if (op == "-")
        return sub(a, b);
      if (op == "*")
        return mul(a, b);
      if (op == "/")
        return udiv(a, b);
      if (op == "%")
        return urem(a, b);
      throw std::logic_error("unknown operator " + op);
    }
    }
    throw std::logic_error("bad predicate");
  }

private:
  Term state_var(const Pred& p)
  {
    auto [first, count] = m_.layout.range_of(p.name);
    std::vector<Term> idx;
    for (const auto& a : p.args)
      idx.push_back(lower(*a));
    if (idx.empty() && count == 1)
      return mk_var({InputKind::Slot, static_cast<unsigned>(first), {}}, m_.sort_of(m_.layout[first].sort));
    // an index that matches no slot (static array out of range) reads zero
    Term out = p.type == PType::Bool   ? mk_bool(false)
               : p.type == PType::Addr ? mk_addr(0)
                                       : mk_bv(0, m_.width());
    for (std::size_t s = first + count; s-- > first;) {
      const auto& slot = m_.layout[s];
      std::vector<Term> conds;
      for (std::size_t l = 0; l < idx.size(); ++l) {
        if (idx[l]->sort.kind == SortKind::Addr)
          conds.push_back(eq(idx[l], mk_addr(slot.path[l])));
        else
          conds.push_back(eq(idx[l], mk_bv(slot.path[l], m_.width())));
      }
      out = ite(and_(conds), mk_var({InputKind::Slot, static_cast<unsigned>(s), {}}, m_.sort_of(slot.sort)), out);
    }
    return out;
  }

  const symexec::ContractModel& m_;
  std::map<std::string, Term> binders_;
};

Term binder_term(const std::string& name, const Property& p, const symexec::ContractModel& m)
{
  auto it = p.binders.find(name);
  PType t = it == p.binders.end() ? PType::Uint : it->second;
  return mk_named(binder_var_name(name), sort_of(t, m.width()));
}

} // namespace

std::string binder_var_name(const std::string& binder) { return "bind_" + binder; }

Term lower_pred(const Pred& p, const symexec::ContractModel& m, const std::map<std::string, Term>& binders)
{
  return Lowerer(m, binders).lower(p);
}

Term lower_pattern(const EventPattern& pat, const Property& p, const symexec::ContractModel& m)
{
  auto tag = m.events.tag_of(pat.event);
  if (!tag)
    return mk_bool(false);
  unsigned w = m.width();
  std::vector<Term> c{eq(mk_var({InputKind::EventTag, 0, {}}, Sort::event()), mk_event(*tag))};
  for (std::size_t k = 0; k < pat.args.size(); ++k) {
    const auto& a = pat.args[k];
    Term arg = mk_var({InputKind::EventArg, static_cast<unsigned>(k), {}}, Sort::bv(w));
    if (a.kind == PatArg::Kind::Literal)
      c.push_back(eq(arg, mk_bv(a.value, w)));
    else if (a.kind == PatArg::Kind::Binder)
      c.push_back(eq(arg, to_bv(binder_term(a.name, p, m), p.binders.at(a.name), m)));
  }
  return and_(c);
}

LoweredProperty lower_property(const Property& p, const symexec::ContractModel& m)
{
  LoweredProperty out;
  out.source = &p;
  std::map<std::string, Term> binders;
  for (const auto& [name, type] : p.binders) {
    Term v = binder_term(name, p, m);
    binders[name] = v;
    out.binders.push_back(v);
  }
  out.pred = p.pred ? lower_pred(*p.pred, m, binders) : mk_bool(true);
  out.where = p.where ? lower_pred(*p.where, m, binders) : mk_bool(true);
  if (p.kind == PropKind::EventChain || p.kind == PropKind::CallPossibility) {
    out.e1 = lower_pattern(p.e1, p, m);
    out.e2 = lower_pattern(p.e2, p, m);
  }
  if (p.kind == PropKind::EventChain)
    out.e3 = lower_pattern(p.e3, p, m);
  std::vector<Term> ca;
  if (p.kind == PropKind::CallPossibility) {
    out.fn = m.find_function(p.fname);
    if (!out.fn)
      throw std::invalid_argument("function '" + p.fname + "' is not part of the model");
    for (std::size_t i = 0; i < p.callArgs.size(); ++i) {
      const auto& a = p.callArgs[i];
      Sort s = m.sort_of(out.fn->params[i].sort);
      Term arg = mk_var({InputKind::Arg, static_cast<unsigned>(i), {}}, s);
      if (a.kind == PatArg::Kind::Literal)
        ca.push_back(eq(arg, mk_const(a.value, s)));
      else if (a.kind == PatArg::Kind::Binder)
        ca.push_back(eq(arg, binders.at(a.name)));
    }
  }
  out.callArgs = and_(ca);
  return out;
}

} // namespace solbmc::spec
