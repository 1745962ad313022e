#include "solbmc/trace.hpp"

#include <sstream>

namespace solbmc::model {

using nlohmann::json;

Word parse_value(const std::string& text, ScalarSort sort, const AddrDomain& addrs)
{
  switch (sort) {
  case ScalarSort::Bool:
    if (text == "true" || text == "1")
      return 1;
    if (text == "false" || text == "0")
      return 0;
    throw TraceFormatError("expected a boolean, got '" + text + "'");
  case ScalarSort::Addr:
    if (auto a = addrs.find(text))
      return *a;
    throw TraceFormatError("unknown address '" + text + "'");
  default:
    if (auto w = parse_word(text))
      return *w;
    throw TraceFormatError("expected a number, got '" + text + "'");
  }
}

namespace {

const frontend::FunDecl& function_of(const frontend::ContractAst& ast, const std::string& name)
{
  const auto* f = ast.find_function(name);
  if (!f || !f->is_public())
    throw TraceFormatError("unknown public function '" + name + "'");
  return *f;
}

std::string value_text(const json& j)
{
  if (j.is_string())
    return j.get<std::string>();
  if (j.is_boolean())
    return j.get<bool>() ? "true" : "false";
  if (j.is_number_unsigned())
    return std::to_string(j.get<std::uint64_t>());
  throw TraceFormatError("unexpected value " + j.dump());
}

const json& field(const json& j, const char* key)
{
  if (!j.is_object() || !j.contains(key))
    throw TraceFormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

json tx_to_json(const TxParams& tx, const frontend::ContractAst& ast, const AddrDomain& addrs)
{
  json j;
  j["function"] = tx.fname;
  j["value"] = tx.value.str();
  j["sender"] = addrs.name(tx.sender);
  j["time"] = tx.time.str();
  json args = json::array();
  const auto* f = ast.find_function(tx.fname);
  for (std::size_t i = 0; i < tx.args.size(); ++i) {
    if (f && i < f->params.size())
      args.push_back(format_value(tx.args[i], f->params[i].type, addrs));
    else
      args.push_back(tx.args[i].str());
  }
  j["args"] = args;
  return j;
}

TxParams tx_from_json(const json& j, const frontend::ContractAst& ast, const AddrDomain& addrs)
{
  TxParams tx;
  tx.fname = value_text(field(j, "function"));
  const auto& f = function_of(ast, tx.fname);
  tx.value = parse_value(value_text(field(j, "value")), ScalarSort::Uint, addrs);
  tx.sender = static_cast<unsigned>(parse_value(value_text(field(j, "sender")), ScalarSort::Addr, addrs));
  tx.time = parse_value(value_text(field(j, "time")), ScalarSort::Uint, addrs);
  const json& args = field(j, "args");
  if (!args.is_array() || args.size() != f.params.size())
    throw TraceFormatError("function '" + tx.fname + "' expects " + std::to_string(f.params.size()) + " arguments");
  for (std::size_t i = 0; i < args.size(); ++i)
    tx.args.push_back(parse_value(value_text(args[i]), scalar_sort(f.params[i].type), addrs));
  return tx;
}

json event_to_json(const std::optional<EventInstance>& ev, const frontend::ContractAst& ast, const AddrDomain& addrs)
{
  if (!ev)
    return nullptr;
  json j;
  j["name"] = ev->tag;
  json args = json::array();
  const auto* decl = ast.find_event(ev->tag);
  for (std::size_t i = 0; i < ev->args.size(); ++i) {
    if (decl && i < decl->params.size())
      args.push_back(format_value(ev->args[i], decl->params[i].type, addrs));
    else
      args.push_back(ev->args[i].str());
  }
  j["args"] = args;
  return j;
}

std::optional<EventInstance> event_from_json(const json& j, const frontend::ContractAst& ast,
                                             const AddrDomain& addrs)
{
  if (j.is_null())
    return std::nullopt;
  EventInstance ev;
  ev.tag = value_text(field(j, "name"));
  const auto* decl = ast.find_event(ev.tag);
  if (!decl)
    throw TraceFormatError("unknown event '" + ev.tag + "'");
  const json& args = field(j, "args");
  if (!args.is_array() || args.size() != decl->params.size())
    throw TraceFormatError("event '" + ev.tag + "' has the wrong number of arguments");
  for (std::size_t i = 0; i < args.size(); ++i)
    ev.args.push_back(parse_value(value_text(args[i]), scalar_sort(decl->params[i].type), addrs));
  return ev;
}

json state_to_json(const SystemState& s, const SlotLayout& layout, const AddrDomain& addrs)
{
  json vars = json::object();
  for (std::size_t i = 0; i < layout.size(); ++i)
    vars[layout[i].name] = format_value(s.vars.at(i), layout[i].sort, addrs);
  json bal = json::object();
  for (unsigned a = 0; a < addrs.size(); ++a)
    bal[addrs.name(a)] = s.balances.at(a).str();
  json j;
  j["vars"] = vars;
  j["alive"] = s.alive;
  j["balances"] = bal;
  j["blocktime"] = s.blocktime.str();
  return j;
}

SystemState state_from_json(const json& j, const SlotLayout& layout, const AddrDomain& addrs)
{
  SystemState s;
  const json& vars = field(j, "vars");
  for (std::size_t i = 0; i < layout.size(); ++i)
    s.vars.push_back(parse_value(value_text(field(vars, layout[i].name.c_str())), layout[i].sort, addrs));
  const json& alive = field(j, "alive");
  if (!alive.is_boolean())
    throw TraceFormatError("'alive' must be a boolean");
  s.alive = alive.get<bool>();
  const json& bal = field(j, "balances");
  for (unsigned a = 0; a < addrs.size(); ++a)
    s.balances.push_back(parse_value(value_text(field(bal, addrs.name(a).c_str())), ScalarSort::Uint, addrs));
  s.blocktime = parse_value(value_text(field(j, "blocktime")), ScalarSort::Uint, addrs);
  return s;
}

} // namespace

std::string format_event(const std::optional<EventInstance>& ev, const frontend::ContractAst& ast,
                         const AddrDomain& addrs)
{
  if (!ev)
    return "NoEvent";
  std::ostringstream os;
  os << ev->tag << "(";
  const auto* decl = ast.find_event(ev->tag);
  for (std::size_t i = 0; i < ev->args.size(); ++i) {
    if (i)
      os << ", ";
    if (decl && i < decl->params.size())
      os << format_value(ev->args[i], decl->params[i].type, addrs);
    else
      os << ev->args[i];
  }
  os << ")";
  return os.str();
}

std::string format_tx(const TxParams& tx, const frontend::ContractAst& ast, const AddrDomain& addrs)
{
  std::ostringstream os;
  os << tx.fname << "(";
  const auto* f = ast.find_function(tx.fname);
  for (std::size_t i = 0; i < tx.args.size(); ++i) {
    if (i)
      os << ", ";
    if (f && i < f->params.size())
      os << format_value(tx.args[i], f->params[i].type, addrs);
    else
      os << tx.args[i];
  }
  os << ") from " << addrs.name(tx.sender) << " value " << tx.value << " at " << tx.time;
  return os.str();
}

std::string format_transcript(const CounterExample& ce, const frontend::ContractAst& ast, const AddrDomain& addrs)
{
  std::ostringstream os;
  for (std::size_t i = 0; i < ce.steps.size(); ++i)
    os << i << ". " << format_event(ce.steps[i].state.event, ast, addrs) << "\n";
  return os.str();
}

json trace_to_json(const CounterExample& ce, const frontend::ContractAst& ast, const SlotLayout& layout,
                   const AddrDomain& addrs)
{
  json j;
  j["contract"] = ast.name;
  json ctor;
  json cargs = json::array();
  for (std::size_t i = 0; i < ce.ctor.args.size(); ++i) {
    if (ast.ctor && i < ast.ctor->params.size())
      cargs.push_back(format_value(ce.ctor.args[i], ast.ctor->params[i].type, addrs));
    else
      cargs.push_back(ce.ctor.args[i].str());
  }
  ctor["args"] = cargs;
  ctor["sender"] = addrs.name(ce.ctor.sender);
  ctor["value"] = ce.ctor.value.str();
  j["constructor"] = ctor;
  json steps = json::array();
  for (std::size_t i = 0; i < ce.steps.size(); ++i) {
    const auto& st = ce.steps[i];
    json s;
    s["index"] = i;
    s["tx"] = st.tx ? tx_to_json(*st.tx, ast, addrs) : json(nullptr);
    s["event"] = event_to_json(st.state.event, ast, addrs);
    s["state"] = state_to_json(st.state, layout, addrs);
    steps.push_back(s);
  }
  j["steps"] = steps;
  if (ce.witness)
    j["witness"] = {{"m", ce.witness->m}, {"q", ce.witness->q}, {"n", ce.witness->n}};
  if (ce.probe)
    j["probe"] = tx_to_json(*ce.probe, ast, addrs);
  if (!ce.focus.empty())
    j["focus"] = ce.focus;
  if (!ce.fromInitial)
    j["fromInitial"] = false;
  return j;
}

CounterExample trace_from_json(const json& j, const frontend::ContractAst& ast, const SlotLayout& layout,
                               const AddrDomain& addrs)
{
  CounterExample ce;
  if (j.contains("constructor")) {
    const json& c = j.at("constructor");
    const json& args = field(c, "args");
    std::size_t expected = ast.ctor ? ast.ctor->params.size() : 0;
    if (!args.is_array() || args.size() != expected)
      throw TraceFormatError("constructor expects " + std::to_string(expected) + " arguments");
    for (std::size_t i = 0; i < args.size(); ++i)
      ce.ctor.args.push_back(parse_value(value_text(args[i]), scalar_sort(ast.ctor->params[i].type), addrs));
    ce.ctor.sender = static_cast<unsigned>(parse_value(value_text(field(c, "sender")), ScalarSort::Addr, addrs));
    ce.ctor.value = parse_value(value_text(field(c, "value")), ScalarSort::Uint, addrs);
  }
  const json& steps = field(j, "steps");
  if (!steps.is_array() || steps.empty())
    throw TraceFormatError("'steps' must be a non-empty array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    TraceStep st;
    const json& tx = field(steps[i], "tx");
    if (i == 0 && !tx.is_null())
      throw TraceFormatError("the initial step carries no transaction");
    if (i > 0)
      st.tx = tx_from_json(tx, ast, addrs);
    st.state = state_from_json(field(steps[i], "state"), layout, addrs);
    st.state.event = event_from_json(field(steps[i], "event"), ast, addrs);
    ce.steps.push_back(std::move(st));
  }
  if (j.contains("witness")) {
    const json& w = j.at("witness");
    ce.witness = Witness{field(w, "m").get<unsigned>(), field(w, "q").get<unsigned>(), field(w, "n").get<unsigned>()};
  }
  if (j.contains("probe"))
    ce.probe = tx_from_json(j.at("probe"), ast, addrs);
  if (j.contains("focus"))
    ce.focus = j.at("focus").get<std::string>();
  if (j.contains("fromInitial"))
    ce.fromInitial = j.at("fromInitial").get<bool>();
  return ce;
}

} // namespace solbmc::model
