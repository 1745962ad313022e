#pragma once

#include "solbmc/ast.hpp"
#include "solbmc/model.hpp"
#include "solbmc/term.hpp"

#include <array>
#include <string>
#include <vector>

namespace solbmc::symexec {

struct ParamInfo {
  std::string name;
  frontend::SolType type;
  model::ScalarSort sort = model::ScalarSort::Uint;
  unsigned enumSize = 0;
};

/// f' of one public function. Terms range over the inputs Slot, Alive,
/// EventTag, EventArg, Balance, Blocktime (pre-state) and Value, Sender,
/// Time, Arg (call parameters).
struct TransitionFn {
  std::string fname;
  bool payable = false;
  std::vector<ParamInfo> params;
  term::Term pre;
  std::vector<term::Term> slots;
  std::vector<term::Term> balances;
  term::Term alive;
  term::Term eventTag;
  std::array<term::Term, 4> eventArgs;
  term::Term blocktime;
};

/// Initial states. varInit ranges over CtorParam, Sender, Value and the
/// symbolic Balance/Blocktime inputs of sigma0; `constraint` additionally
/// mentions the Slot/Alive/EventTag/EventArg inputs of sigma0.
struct InitialStateSpec {
  std::vector<ParamInfo> ctorParams;
  bool payable = false;
  std::vector<term::Term> varInit;
  term::Term constraint;
};

/// Events emitted somewhere in the contract, in declaration order. Tag 0 of
/// the event sort is NoEvent; event i has tag i + 1.
struct EventSet {
  std::vector<const frontend::EventDecl*> events;

  std::optional<unsigned> tag_of(std::string_view name) const;
  std::string name_of(unsigned tag) const;
};

struct ContractModel {
  const frontend::ContractAst* ast = nullptr;
  model::ModelConfig cfg;
  model::AddrDomain addrs{1};
  model::SlotLayout layout;
  EventSet events;
  std::vector<TransitionFn> functions;
  InitialStateSpec init;

  unsigned width() const { return cfg.intWidth; }
  const TransitionFn* find_function(std::string_view name) const;
  std::optional<unsigned> function_index(std::string_view name) const;
  term::Sort sort_of(model::ScalarSort s) const;
};

/// Replaces every internal call by the callee's body. Parameters are bound
/// to fresh locals (or substituted when the argument is a literal or local
/// the callee never assigns); a callee whose body is a single `return e;` is
/// substituted as an expression.
frontend::FunDecl inline_internal_calls(const frontend::FunDecl& f, const frontend::ContractAst& ast);

/// Largest number of emits on any syntactic path of `f` (calls followed).
int max_emits_per_path(const frontend::FunDecl& f, const frontend::ContractAst& ast);

EventSet collect_events(const frontend::ContractAst& ast);

TransitionFn build_transition(const frontend::FunDecl& f, const frontend::ContractAst& ast,
                              const model::ModelConfig& cfg, const model::AddrDomain& addrs,
                              const model::SlotLayout& layout, const EventSet& events);

InitialStateSpec build_initial(const frontend::ContractAst& ast, const model::ModelConfig& cfg,
                               const model::AddrDomain& addrs, const model::SlotLayout& layout);

/// Everything the encoder needs. The AST must outlive the model.
ContractModel build_model(const frontend::ContractAst& ast, const model::ModelConfig& cfg);

/// Zero value of a slot sort.
term::Term zero_of(model::ScalarSort s, unsigned width);

/// Address term as a W-bit ordinal, as stored in event arguments.
term::Term addr_to_bv(const term::Term& a, std::size_t domainSize, unsigned width);
term::Term bool_to_bv(const term::Term& b, unsigned width);

/// S-expression dump of the model (`--dump-model`).
std::string dump_model(const ContractModel& m);

/// Human-readable name of an input, used by dumps.
std::string input_name(const term::Input& in, const ContractModel& m, const std::vector<ParamInfo>* params);

} // namespace solbmc::symexec
