#pragma once

#include "solbmc/ast.hpp"
#include "solbmc/word.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace solbmc::model {

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct ModelConfig {
  unsigned intWidth = 16; // W
  unsigned addrCount = 3; // user addresses n
  unsigned maxTrace = 12; // k
  unsigned minTrace = 0;

  /// Throws ConfigError. Widths below 8 are accepted for exhaustive testing.
  void validate() const;
};

/// {noAddr, addr1 .. addrN, contractAddr}; an address value is its ordinal.
class AddrDomain {
public:
  explicit AddrDomain(unsigned userCount);

  std::size_t size() const { return names_.size(); }
  unsigned no_addr() const { return 0; }
  unsigned contract() const { return static_cast<unsigned>(names_.size() - 1); }
  unsigned user(unsigned i) const { return i; } // 1-based
  unsigned user_count() const { return contract() - 1; }
  bool is_user(unsigned a) const { return a != no_addr() && a != contract(); }
  const std::string& name(unsigned a) const { return names_.at(a); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<unsigned> find(std::string_view name) const;

private:
  std::vector<std::string> names_;
};

AddrDomain build_addr_domain(const ModelConfig& cfg);

enum class ScalarSort { Bool, Uint, Addr, Enum };

ScalarSort scalar_sort(const frontend::SolType& t);

/// One flattened storage cell.
struct Slot {
  std::string name; // e.g. "isVoted[0][addr2]"
  std::string var;  // declaring state variable
  std::vector<unsigned> path; // array index or address ordinal per level
  ScalarSort sort = ScalarSort::Uint;
  std::string enumName;
  unsigned enumSize = 0;
};

/// Flattening of all non-constant state variables, in declaration order
/// then index/address order.
class SlotLayout {
public:
  SlotLayout() = default;
  SlotLayout(const frontend::ContractAst& ast, const AddrDomain& addrs);

  const std::vector<Slot>& slots() const { return slots_; }
  std::size_t size() const { return slots_.size(); }
  const Slot& operator[](std::size_t i) const { return slots_[i]; }

  /// First slot and slot count of a state variable.
  std::pair<std::size_t, std::size_t> range_of(std::string_view var) const;
  std::optional<std::size_t> find(std::string_view slotName) const;

private:
  std::vector<Slot> slots_;
  std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> ranges_;
  std::map<std::string, std::size_t, std::less<>> byName_;
};

std::vector<std::pair<std::string, ScalarSort>> state_slots(const frontend::ContractAst& ast,
                                                            const ModelConfig& cfg);

struct EventInstance {
  std::string tag;
  std::vector<Word> args; // addresses by ordinal, bools as 0/1

  bool operator==(const EventInstance&) const = default;
};

struct SystemState {
  std::vector<Word> vars;
  bool alive = true;
  std::optional<EventInstance> event;
  std::vector<Word> balances;
  Word blocktime = 0;

  bool operator==(const SystemState&) const = default;
  bool operator<(const SystemState& o) const;
};

struct TxParams {
  std::string fname;
  Word value = 0;
  unsigned sender = 0;
  Word time = 0;
  std::vector<Word> args;

  bool operator==(const TxParams&) const = default;
};

/// Renders a value of the given sort: addresses by name, bools as true/false.
std::string format_value(const Word& v, ScalarSort sort, const AddrDomain& addrs);
std::string format_value(const Word& v, const frontend::SolType& t, const AddrDomain& addrs);

/// Multi-line dump used in reports and test failures.
std::string format_state(const SystemState& s, const SlotLayout& layout, const AddrDomain& addrs);

} // namespace solbmc::model
