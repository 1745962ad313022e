#pragma once

#include "solbmc/ast.hpp"
#include "solbmc/model.hpp"

#include "json.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace solbmc::model {

/// Inputs of the constructor call that produced the initial state.
struct CtorInputs {
  std::vector<Word> args;
  unsigned sender = 0;
  Word value = 0;

  bool operator==(const CtorInputs&) const = default;
};

/// One state of a trace. `tx` is absent for the initial state.
struct TraceStep {
  std::optional<TxParams> tx;
  SystemState state;

  bool operator==(const TraceStep&) const = default;
};

struct Witness {
  unsigned m = 0, q = 0, n = 0;
  bool operator==(const Witness&) const = default;
};

struct CounterExample {
  CtorInputs ctor;
  std::vector<TraceStep> steps; // steps[0] is the initial state
  std::optional<Witness> witness;
  std::optional<TxParams> probe; // call tried in state q (call possibility)
  std::string focus;
  /// False for inductive-step counter-examples, whose first state is only
  /// assumed to satisfy the invariant; replay then starts from it as is.
  bool fromInitial = true;

  std::size_t length() const { return steps.empty() ? 0 : steps.size() - 1; }
  bool operator==(const CounterExample&) const = default;
};

class TraceFormatError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Parses a value rendered by format_value.
Word parse_value(const std::string& text, ScalarSort sort, const AddrDomain& addrs);

/// `Name(a, b)` with arguments rendered by the event's parameter types.
std::string format_event(const std::optional<EventInstance>& ev, const frontend::ContractAst& ast,
                         const AddrDomain& addrs);

std::string format_tx(const TxParams& tx, const frontend::ContractAst& ast, const AddrDomain& addrs);

/// Numbered event transcript: `0. NoEvent`, `1. Deposited(addr1, 5)`, ...
std::string format_transcript(const CounterExample& ce, const frontend::ContractAst& ast, const AddrDomain& addrs);

nlohmann::json trace_to_json(const CounterExample& ce, const frontend::ContractAst& ast, const SlotLayout& layout,
                             const AddrDomain& addrs);

/// Inverse of trace_to_json. Throws TraceFormatError.
CounterExample trace_from_json(const nlohmann::json& j, const frontend::ContractAst& ast, const SlotLayout& layout,
                               const AddrDomain& addrs);

} // namespace solbmc::model
