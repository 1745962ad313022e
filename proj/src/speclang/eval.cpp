#include "solbmc/speclang.hpp"

#include <stdexcept>

namespace solbmc::spec {

namespace {

Word state_var(const Pred& p, const model::SystemState& s, const EvalEnv& env)
{
  auto [first, count] = env.layout->range_of(p.name);
  std::vector<Word> idx;
  for (const auto& a : p.args)
    idx.push_back(evaluate(*a, s, env));
  for (std::size_t i = first; i < first + count; ++i) {
    const auto& slot = (*env.layout)[i];
    bool match = true;
    for (std::size_t l = 0; l < idx.size() && match; ++l)
      match = idx[l] == slot.path[l];
    if (match)
      return s.vars.at(i);
  }
  return 0;
}

} // namespace

Word evaluate(const Pred& p, const model::SystemState& s, const EvalEnv& env)
{
  unsigned w = env.width;
  Word mask = width_mask(w);
  switch (p.kind) {
  case PKind::Number:
  case PKind::BoolLit:
  case PKind::AddrLit:
    return p.value;
  case PKind::Alive:
    return s.alive ? 1 : 0;
  case PKind::Blocktime:
    return s.blocktime;
  case PKind::MsgSender:
  case PKind::MsgValue:
  case PKind::Param: {
    if (!env.call)
      throw std::logic_error("call parameters are not available here");
    if (p.kind == PKind::MsgSender)
      return env.call->sender;
    if (p.kind == PKind::MsgValue)
      return env.call->value;
    return env.call->args.at(static_cast<std::size_t>(p.value));
  }
  case PKind::Binder: {
    auto it = env.binders.find(p.name);
    if (it == env.binders.end())
      throw std::logic_error("unbound binder '" + p.name + "'");
    return it->second;
  }
  case PKind::Balance: {
    Word a = evaluate(*p.args[0], s, env);
    return a < s.balances.size() ? s.balances[static_cast<std::size_t>(a)] : Word(0);
  }
  case PKind::StateVar:
    return state_var(p, s, env);
  case PKind::Sum: {
    EvalEnv inner = env;
    Word total = 0;
    for (unsigned a = 0; a < env.addrs->size(); ++a) {
      if (p.userOnly && !env.addrs->is_user(a))
        continue;
      inner.binders[p.name] = a;
      total = (total + evaluate(*p.args[0], s, inner)) & mask;
    }
    return total;
  }
  case PKind::Unary: {
    Word x = evaluate(*p.args[0], s, env);
    if (p.op == "!")
      return x == 0 ? 1 : 0;
    return (~x + 1) & mask;
  }
  case PKind::Binary: {
    const std::string& op = p.op;
    if (op == "&&")
      return evaluate(*p.args[0], s, env) != 0 && evaluate(*p.args[1], s, env) != 0 ? 1 : 0;
    if (op == "||")
      return evaluate(*p.args[0], s, env) != 0 || evaluate(*p.args[1], s, env) != 0 ? 1 : 0;
    Word a = evaluate(*p.args[0], s, env);
    Word b = evaluate(*p.args[1], s, env);
    if (op == "==")
      return a == b ? 1 : 0;
    if (op == "!=")
      return a != b ? 1 : 0;
    if (op == "<")
      return a < b ? 1 : 0;
    if (op == "<=")
      return a <= b ? 1 : 0;
    if (op == ">")
      return a > b ? 1 : 0;
    if (op == ">=")
      return a >= b ? 1 : 0;
    if (op == "+")
      return (a + b) & mask;
    if (op == "-")
      return (a - b) & mask;
    if (op == "*")
      return Word((WideWord(a) * WideWord(b)) & WideWord(mask));
    // bit-vector semantics: x / 0 is all ones, x % 0 is x
    if (op == "/")
      return b == 0 ? mask : a / b;
    if (op == "%")
      return b == 0 ? a : a % b;
    throw std::logic_error("unknown operator " + op);
  }
  }
  throw std::logic_error("bad predicate");
}

bool match_event(const EventPattern& pat, const std::optional<model::EventInstance>& ev, EvalEnv& env)
{
  if (!ev || ev->tag != pat.event)
    return false;
  std::map<std::string, Word> bound = env.binders;
  for (std::size_t k = 0; k < pat.args.size(); ++k) {
    const auto& a = pat.args[k];
    Word v = k < ev->args.size() ? ev->args[k] : Word(0);
    if (a.kind == PatArg::Kind::Literal && v != a.value)
      return false;
    if (a.kind == PatArg::Kind::Binder) {
      auto [it, fresh] = bound.emplace(a.name, v);
      if (!fresh && it->second != v)
        return false;
    }
  }
  env.binders = std::move(bound);
  return true;
}

} // namespace solbmc::spec
