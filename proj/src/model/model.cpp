#include "solbmc/model.hpp"

#include <sstream>
#include <tuple>

namespace solbmc::model {

using frontend::SolType;
using frontend::TypeKind;

void ModelConfig::validate() const
{
  if (intWidth < 1 || intWidth > kMaxWidth)
    throw ConfigError("integer width must be between 1 and 256 bits");
  if (addrCount < 1)
    throw ConfigError("at least one user address is required (noAddr and contractAddr cannot send transactions)");
  if (addrCount > 200)
    throw ConfigError("too many user addresses");
  if (minTrace > maxTrace)
    throw ConfigError("minimum trace length exceeds the maximum");
}

AddrDomain::AddrDomain(unsigned userCount)
{
  names_.push_back("noAddr");
  for (unsigned i = 1; i <= userCount; ++i)
    names_.push_back("addr" + std::to_string(i));
  names_.push_back("contractAddr");
}

std::optional<unsigned> AddrDomain::find(std::string_view name) const
{
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name)
      return static_cast<unsigned>(i);
  }
  return std::nullopt;
}

AddrDomain build_addr_domain(const ModelConfig& cfg)
{
  if (cfg.addrCount == 0)
    throw ConfigError("at least one user address is required (noAddr and contractAddr cannot send transactions)");
  return AddrDomain(cfg.addrCount);
}

ScalarSort scalar_sort(const SolType& t)
{
  switch (t.kind) {
  case TypeKind::Bool:
    return ScalarSort::Bool;
  case TypeKind::Address:
    return ScalarSort::Addr;
  case TypeKind::Enum:
    return ScalarSort::Enum;
  default:
    return ScalarSort::Uint;
  }
}

namespace {

void flatten(const frontend::ContractAst& ast, const AddrDomain& addrs, const std::string& var, const SolType& t,
             std::string name, std::vector<unsigned> path, std::vector<Slot>& out)
{
  switch (t.kind) {
  case TypeKind::Mapping:
    for (unsigned a = 0; a < addrs.size(); ++a) {
      auto p = path;
      p.push_back(a);
      flatten(ast, addrs, var, *t.elem, name + "[" + addrs.name(a) + "]", std::move(p), out);
    }
    return;
  case TypeKind::StaticArray:
    for (unsigned i = 0; i < t.length; ++i) {
      auto p = path;
      p.push_back(i);
      flatten(ast, addrs, var, *t.elem, name + "[" + std::to_string(i) + "]", std::move(p), out);
    }
    return;
  default:
    break;
  }
  Slot s;
  s.name = std::move(name);
  s.var = var;
  s.path = std::move(path);
  s.sort = scalar_sort(t);
  if (t.kind == TypeKind::Enum) {
    s.enumName = t.name;
    if (const auto* en = ast.find_enum(t.name))
      s.enumSize = static_cast<unsigned>(en->members.size());
  }
  out.push_back(std::move(s));
}

} // namespace

SlotLayout::SlotLayout(const frontend::ContractAst& ast, const AddrDomain& addrs)
{
  for (const auto& v : ast.stateVars) {
    if (v.isConstant)
      continue;
    std::size_t first = slots_.size();
    flatten(ast, addrs, v.name, v.type, v.name, {}, slots_);
    ranges_[v.name] = {first, slots_.size() - first};
  }
  for (std::size_t i = 0; i < slots_.size(); ++i)
    byName_[slots_[i].name] = i;
}

std::pair<std::size_t, std::size_t> SlotLayout::range_of(std::string_view var) const
{
  auto it = ranges_.find(var);
  if (it == ranges_.end())
    throw std::out_of_range("no state variable '" + std::string(var) + "'");
  return it->second;
}

std::optional<std::size_t> SlotLayout::find(std::string_view slotName) const
{
  auto it = byName_.find(slotName);
  if (it == byName_.end())
    return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, ScalarSort>> state_slots(const frontend::ContractAst& ast, const ModelConfig& cfg)
{
  SlotLayout layout(ast, build_addr_domain(cfg));
  std::vector<std::pair<std::string, ScalarSort>> out;
  for (const auto& s : layout.slots())
    out.emplace_back(s.name, s.sort);
  return out;
}

bool SystemState::operator<(const SystemState& o) const
{
  auto ev = [](const std::optional<EventInstance>& e) {
    return e ? std::make_tuple(true, e->tag, e->args) : std::make_tuple(false, std::string(), std::vector<Word>());
  };
  return std::make_tuple(vars, alive, ev(event), balances, blocktime) <
         std::make_tuple(o.vars, o.alive, ev(o.event), o.balances, o.blocktime);
}

std::string format_value(const Word& v, ScalarSort sort, const AddrDomain& addrs)
{
  switch (sort) {
  case ScalarSort::Bool:
    return v != 0 ? "true" : "false";
  case ScalarSort::Addr:
    if (v < addrs.size())
      return addrs.name(static_cast<unsigned>(v));
    return "addr?" + v.str();
  default:
    return v.str();
  }
}

std::string format_value(const Word& v, const SolType& t, const AddrDomain& addrs)
{
  return format_value(v, scalar_sort(t), addrs);
}

std::string format_state(const SystemState& s, const SlotLayout& layout, const AddrDomain& addrs)
{
  std::ostringstream os;
  for (std::size_t i = 0; i < layout.size() && i < s.vars.size(); ++i)
    os << "  " << layout[i].name << " = " << format_value(s.vars[i], layout[i].sort, addrs) << "\n";
  os << "  alive = " << (s.alive ? "true" : "false") << "\n";
  for (std::size_t a = 0; a < s.balances.size() && a < addrs.size(); ++a)
    os << "  balance[" << addrs.name(static_cast<unsigned>(a)) << "] = " << s.balances[a] << "\n";
  os << "  blocktime = " << s.blocktime << "\n";
  return os.str();
}

} // namespace solbmc::model
