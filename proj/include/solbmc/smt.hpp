#pragma once

#include "solbmc/sexpr.hpp"
#include "solbmc/symexec.hpp"
#include "solbmc/term.hpp"
#include "solbmc/trace.hpp"

#include <array>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace solbmc::smt {

// ---------------------------------------------------------------------------
// Solver process

class SolverProcessError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  std::string path;              // empty: $SOLBMC_SOLVER, then `z3` on PATH
  std::vector<std::string> args; // appended to the defaults for known solvers
  double timeoutSeconds = 600;
  std::string dumpDir;           // write every query script here when set
  bool incremental = false;      // keep one process and use push/pop
};

/// Resolves the solver binary: explicit path, $SOLBMC_SOLVER, `z3` on PATH.
std::string resolve_solver_path(const std::string& path);

/// Command-line arguments that put a known solver into SMT-LIB stdin mode.
std::vector<std::string> default_solver_args(const std::string& path);

/// A child solver speaking SMT-LIB over its stdin/stdout.
class SolverProcess {
public:
  SolverProcess(const std::string& path, const std::vector<std::string>& args);
  ~SolverProcess();
  SolverProcess(const SolverProcess&) = delete;
  SolverProcess& operator=(const SolverProcess&) = delete;

  using Clock = std::chrono::steady_clock;

  /// Throws SolverProcessError when the child is gone.
  void send(std::string_view text, Clock::time_point deadline);

  /// Next complete response, or nullopt when the deadline passed.
  std::optional<std::string> read_response(Clock::time_point deadline);

  bool running() const { return pid_ > 0; }
  void kill();

private:
  int pid_ = -1;
  int in_ = -1;  // child's stdin
  int out_ = -1; // child's stdout (stderr merged)
  std::string buffer_;
};

// ---------------------------------------------------------------------------
// Scripts

enum class Status { Sat, Unsat, Unknown };

std::string_view status_name(Status s);

struct QueryResult {
  Status status = Status::Unknown;
  std::string reason; // for Unknown
  std::map<std::string, Word> values;
  double seconds = 0;
};

/// Builds an SMT-LIB script for one model and runs it. Terms are printed with
/// shared subterms bound by define-fun. In incremental mode one solver process
/// lives as long as the context; otherwise every check starts a fresh process
/// that receives the whole script.
class Context {
public:
  Context(const symexec::ContractModel& m, SolverOptions opt, std::string name = "query");
  ~Context();

  void assert_term(const term::Term& t);
  void push();
  void pop();

  /// Checks satisfiability and, when sat, reads back the values of `wanted`
  /// (all must be Named variables).
  QueryResult check(const std::vector<term::Term>& wanted);

  /// The script sent so far (declarations, assertions, push/pop).
  const std::string& script() const { return script_; }
  unsigned queries() const { return queries_; }
  void set_timeout(double seconds) { opt_.timeoutSeconds = seconds; }

  std::string sort_text(const term::Sort& s) const;
  std::string const_text(const term::Node& n) const;

private:
  void emit(const std::string& text);
  void declare(const term::Input& in, const term::Sort& s);
  std::string render(const term::Term& t, std::unordered_map<const term::Node*, unsigned>& refs);
  Word decode_value(const SExpr& e, const term::Sort& s) const;
  QueryResult run_fresh(const std::vector<term::Term>& wanted);
  QueryResult run_incremental(const std::vector<term::Term>& wanted);
  QueryResult talk(SolverProcess& p, const std::string& text, const std::vector<term::Term>& wanted,
                   SolverProcess::Clock::time_point deadline);
  void dump(const std::string& text);

  const symexec::ContractModel& model_;
  SolverOptions opt_;
  std::string name_;
  std::string solverPath_;
  std::vector<std::string> solverArgs_;
  std::string script_;
  std::size_t sent_ = 0; // prefix of script_ already sent to the live process
  unsigned queries_ = 0;
  unsigned defCounter_ = 0;

  struct Scope {
    std::vector<std::string> declared;
    std::vector<const term::Node*> defined;
  };
  std::vector<Scope> scopes_;
  std::map<std::string, term::Sort> declared_;
  std::unordered_map<const term::Node*, std::pair<std::string, term::Term>> defined_;
  std::unique_ptr<SolverProcess> live_;
};

// ---------------------------------------------------------------------------
// Encoding of the transition system

struct StateVars {
  std::vector<term::Term> slots;
  term::Term alive;
  term::Term tag;
  std::array<term::Term, 4> args;
  std::vector<term::Term> balances;
  term::Term blocktime;

  std::vector<term::Term> all() const;
};

struct TxVars {
  term::Term fn;
  term::Term value;
  term::Term sender;
  term::Term time;
  std::vector<term::Term> argw, argb, arga; // one bank per sort

  std::vector<term::Term> all() const;
};

struct CtorVars {
  std::vector<term::Term> params;
  term::Term sender;
  term::Term value;

  std::vector<term::Term> all() const;
};

/// Converts a solver variable name into the SMT-LIB symbol, quoting when needed.
std::string symbol(const std::string& name);

class Encoder {
public:
  explicit Encoder(const symexec::ContractModel& m);

  const symexec::ContractModel& model() const { return m_; }

  StateVars state(unsigned i) const;
  /// Parameters of transaction i, which leads from state i-1 to state i.
  TxVars tx(unsigned i) const;
  /// Transaction variables named `<prefix>fn`, `<prefix>value`, ...
  TxVars tx_vars(const std::string& prefix) const;
  CtorVars ctor() const;

  /// Bank variable carrying parameter `p` of `f`.
  term::Term arg_var(const TxVars& tx, const symexec::TransitionFn& f, std::size_t p) const;

  /// Instantiates a term over model inputs: state inputs read state `i`,
  /// call inputs read `tx` (and `f` for parameters).
  term::Term at(const term::Term& t, unsigned i, const TxVars* tx, const symexec::TransitionFn* f) const;

  term::Term pre(const symexec::TransitionFn& f, unsigned i, const TxVars& tx) const;

  /// fn_i selects the function, its precondition holds in state i-1 and
  /// state i is the selected update.
  term::Term transition(unsigned i) const;

  /// The same relation as one disjunct per function.
  std::vector<term::Term> transition_disjuncts(unsigned i) const;

  /// Transitions 1..k.
  term::Term path(unsigned k) const;

  /// I(state 0).
  term::Term initial() const;

  /// Strictly increasing transaction times; the first is not before state 0.
  term::Term time_monotonic(unsigned k) const;
  /// Senders of transactions 1..k are user addresses.
  term::Term no_self_call(unsigned k) const;
  /// Sum of the balances of state i, zero-extended so it cannot wrap.
  term::Term total_balance(unsigned i) const;
  /// Total balance of state i equals that of state i-1.
  term::Term conserved(unsigned i) const;
  /// The total balance of state i fits in W bits (true of sigma0 by I).
  term::Term supply_bounded(unsigned i) const;
  /// transition(1) from a supply-bounded state with a changed total balance.
  /// Unsat means every reachable transition conserves value, by induction
  /// from I, which makes conserved(i) a redundant lemma on paths.
  term::Term conservation_violation() const;

  /// time_monotonic, no_self_call and initial.
  term::Term side_constraints(unsigned k) const;

  /// Every variable needed to decode a trace of length k.
  std::vector<term::Term> trace_vars(unsigned k) const;

  model::SystemState decode_state(const std::map<std::string, Word>& v, unsigned i) const;
  model::TxParams decode_tx(const std::map<std::string, Word>& v, unsigned i) const;
  /// Call of `f` read from `t`, whose fn variable is ignored.
  model::TxParams decode_call(const std::map<std::string, Word>& v, const TxVars& t,
                              const symexec::TransitionFn& f) const;
  model::CounterExample decode(const std::map<std::string, Word>& v, unsigned k) const;

private:
  const symexec::ContractModel& m_;
  unsigned bankW_ = 0, bankB_ = 0, bankA_ = 0;
  std::vector<std::vector<std::pair<char, unsigned>>> argSlot_; // per function: (bank, index) per param
  mutable std::map<unsigned, term::Term> transitions_;
};

/// Name of the solver variable behind an input of the encoder.
term::Term var(const std::string& name, term::Sort sort);

} // namespace solbmc::smt
