#pragma once

#include "solbmc/ast.hpp"
#include "solbmc/diagnostics.hpp"
#include "solbmc/model.hpp"
#include "solbmc/symexec.hpp"
#include "solbmc/term.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace solbmc::spec {

enum class PType { Bool, Uint, Addr };

enum class PKind {
  Number,
  BoolLit,
  AddrLit,   // value is the ordinal
  StateVar,  // name, then one index per `[...]` in args
  Balance,   // balance[args[0]]
  Blocktime,
  Alive,
  Binder,    // pattern or SUM variable
  Param,     // parameter `index` of the called function
  MsgSender,
  MsgValue,
  Unary,     // op "!" or "-"
  Binary,
  Sum,       // SUM name in range: args[0]
};

struct Pred;
using PredPtr = std::shared_ptr<const Pred>;

struct Pred {
  PKind kind = PKind::Number;
  std::string op;   // Unary/Binary operator
  std::string name; // StateVar/Binder/Param/Sum variable
  Word value = 0;   // Number/BoolLit/AddrLit, Param index
  bool userOnly = false; // Sum over UserAddr
  std::vector<PredPtr> args;
  PType type = PType::Uint;
  SourceSpan span;
};

struct PatArg {
  enum class Kind { Wildcard, Binder, Literal } kind = Kind::Wildcard;
  std::string name;
  Word value = 0;
};

struct EventPattern {
  std::string event;
  std::vector<PatArg> args;
  SourceSpan span;
};

enum class PropKind { Invariant, Trace, EventChain, CallPossibility };

std::string_view kind_name(PropKind k);

struct Property {
  std::string name;
  PropKind kind = PropKind::Invariant;
  PredPtr pred;          // Invariant / Trace
  unsigned traceK = 0;   // Trace: explicit bound, 0 when absent
  EventPattern e1, e2, e3; // e3: forbidden event (EventChain)
  std::string fname;     // CallPossibility
  std::vector<PatArg> callArgs;
  bool always = true;    // CallPossibility: always or never possible
  PredPtr where;         // optional argument constraint
  std::map<std::string, PType> binders;
  SourceSpan span;
};

struct SpecResult {
  std::vector<Property> properties;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};

/// Parses and type-checks a specification file against a contract. The
/// address names (noAddr, addr1.., contractAddr) come from `cfg`.
SpecResult parse_spec(std::string_view text, const frontend::ContractAst& ast, const model::ModelConfig& cfg);

// ---------------------------------------------------------------------------
// Lowering

/// Terms range over the model inputs of symexec (state inputs, and Value,
/// Sender, Arg for the call of a CallPossibility), plus Named binder
/// variables `bind_<name>`.
struct LoweredProperty {
  const Property* source = nullptr;
  term::Term pred;
  term::Term e1, e2, e3; // event patterns over EventTag/EventArg and binders
  term::Term where;      // true when absent
  term::Term callArgs;   // call pattern constraints over Arg inputs
  const symexec::TransitionFn* fn = nullptr;
  std::vector<term::Term> binders;
};

LoweredProperty lower_property(const Property& p, const symexec::ContractModel& m);

/// Lowers one predicate; `binders` maps binder names to terms.
term::Term lower_pred(const Pred& p, const symexec::ContractModel& m, const std::map<std::string, term::Term>& binders);

/// Event pattern as a constraint on the EventTag/EventArg inputs.
term::Term lower_pattern(const EventPattern& pat, const Property& p, const symexec::ContractModel& m);

std::string binder_var_name(const std::string& binder);

// ---------------------------------------------------------------------------
// Direct evaluation on concrete states

struct EvalEnv {
  const frontend::ContractAst* ast = nullptr;
  const model::SlotLayout* layout = nullptr;
  const model::AddrDomain* addrs = nullptr;
  unsigned width = 16;
  std::map<std::string, Word> binders;
  const model::TxParams* call = nullptr;
};

Word evaluate(const Pred& p, const model::SystemState& s, const EvalEnv& env);
inline bool holds(const Pred& p, const model::SystemState& s, const EvalEnv& env) { return evaluate(p, s, env) != 0; }

/// Matches an event against a pattern, binding unbound binders in `env` and
/// checking bound ones. Literal and binder arguments compare raw values.
bool match_event(const EventPattern& pat, const std::optional<model::EventInstance>& ev, EvalEnv& env);

} // namespace solbmc::spec
