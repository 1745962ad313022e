#pragma once

#include "solbmc/ast.hpp"
#include "solbmc/model.hpp"
#include "solbmc/trace.hpp"

#include <cstdint>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace solbmc::interp {

/// Malformed input that the front end should have rejected, or a second
/// event on one transaction.
class InterpError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class RevertReason {
  NotAlive,
  NotPayable,
  SelfCall,
  InsufficientFunds, // sender cannot pay msg.value
  BadArgument,       // enum parameter out of range
  Require,
  Assert,
  Revert,
  Throw,
  DivisionByZero,
  ZeroModulus,       // addmod / mulmod
  TransferFailed,    // contract balance below the amount
  IndexOutOfBounds,
  EnumConversion,
};

std::string_view reason_name(RevertReason r);

struct TxOutcome {
  bool committed = false;
  model::SystemState state; // post-state when committed, the untouched pre-state otherwise
  RevertReason reason = RevertReason::Revert;
};

class Interpreter {
public:
  Interpreter(const frontend::ContractAst& ast, const model::ModelConfig& cfg);

  const frontend::ContractAst& ast() const { return ast_; }
  const model::ModelConfig& config() const { return cfg_; }
  const model::AddrDomain& addrs() const { return addrs_; }
  const model::SlotLayout& layout() const { return layout_; }
  unsigned width() const { return cfg_.intWidth; }

  /// Runs state-variable initializers and the constructor. `now` inside the
  /// constructor reads `blocktime`.
  model::SystemState construct(const model::CtorInputs& in, const std::vector<Word>& balances, const Word& blocktime) const;

  TxOutcome exec_tx(const model::SystemState& state, const model::TxParams& tx) const;

private:
  const frontend::ContractAst& ast_;
  model::ModelConfig cfg_;
  model::AddrDomain addrs_;
  model::SlotLayout layout_;
};

struct StepReport {
  std::size_t index = 0;
  bool committed = true;
  bool eventMatch = true;
  bool stateMatch = true;
  std::string detail;
};

struct ReplayReport {
  bool confirmed = false;
  std::vector<StepReport> steps;

  /// One line per step, then the verdict.
  std::string str() const;
};

/// Re-executes a counter-example from its constructor inputs and initial
/// balances/blocktime, comparing every event and post-state.
ReplayReport replay(const model::CounterExample& ce, const Interpreter& in);

/// Every value of a parameter of the given type at the configured width.
std::vector<Word> domain_of(const frontend::SolType& t, const Interpreter& in);

/// States reachable from `init` in at most `k` committed transactions, with
/// user senders only, the first transaction at time >= init.blocktime and
/// strictly increasing times afterwards. Meant for tiny widths.
std::set<model::SystemState> enumerate_reachable(const Interpreter& in, const model::SystemState& init, unsigned k);

struct FuzzOptions {
  std::uint64_t seed = 1;
  unsigned runs = 100;
  unsigned length = 10;
};

struct FuzzReport {
  std::uint64_t seed = 0;
  unsigned committed = 0;
  unsigned reverted = 0;
  std::vector<std::string> failures;
};

/// Random transactions from random initial states. `check` is called on
/// every committed state and returns an error message or empty.
FuzzReport fuzz(const Interpreter& in, const FuzzOptions& opt,
                const std::function<std::string(const model::SystemState&)>& check);

} // namespace solbmc::interp
