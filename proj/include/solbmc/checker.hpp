#pragma once

#include "solbmc/interp.hpp"
#include "solbmc/smt.hpp"
#include "solbmc/speclang.hpp"
#include "solbmc/symexec.hpp"
#include "solbmc/trace.hpp"

#include "json.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace solbmc::checker {

enum class Verdict { Holds, Violated, Unknown };

std::string_view verdict_name(Verdict v);

struct QueryStat {
  std::string label; // "base", "step", "i=4", ...
  unsigned length = 0;
  smt::Status status = smt::Status::Unknown;
  double seconds = 0;
};

struct CheckResult {
  std::string property;
  spec::PropKind kind = spec::PropKind::Invariant;
  Verdict verdict = Verdict::Unknown;
  /// Holds: bound reached; Violated: which query; Unknown: step and reason.
  std::string detail;
  unsigned bound = 0; // largest path length queried
  std::optional<model::CounterExample> ce;
  std::string transition; // step counter-example of an invariant: f'
  std::optional<interp::ReplayReport> replay;
  /// The violation condition re-evaluated on the counter-example by the
  /// interpreter and the predicate evaluator.
  bool violationConfirmed = false;
  std::string violationNote;
  std::vector<QueryStat> queries;
  double seconds = 0;

  /// Violated with a Confirmed replay and a re-checked violation.
  bool confirmed() const { return verdict == Verdict::Violated && replay && replay->confirmed && violationConfirmed; }
};

struct CheckOptions {
  smt::SolverOptions solver;
  unsigned kmin = 0;
  unsigned kmax = 12;
  bool kminSet = false; // --min-k given: overrides the start at 3 of chains and call possibilities
  bool kmaxSet = false; // --k given: overrides `trace(k)`
  /// Assert total-balance conservation at every step once solver queries
  /// have shown the model conserves value (a redundant lemma).
  bool lemmas = false;
  /// Without kminSet, chains and call possibilities first query the longest
  /// path and, when it is violated, shorten the counter-example with queries
  /// limited to this many seconds each (0 disables the top-down search).
  double shrinkSeconds = 60;
  std::function<void(const std::string& property, const QueryStat&)> onQuery;
};

class Checker {
public:
  Checker(const symexec::ContractModel& m, const interp::Interpreter& in, CheckOptions opt);

  CheckResult check(const spec::Property& p) const;

  CheckResult check_invariant(const spec::Property& p) const;
  CheckResult check_trace(const spec::Property& p) const;
  CheckResult check_event_chain(const spec::Property& p) const;
  CheckResult check_call_possibility(const spec::Property& p) const;

private:
  CheckResult check_windowed(const spec::Property& p) const;
  void confirm(const spec::Property& p, CheckResult& r) const;
  /// Per-step lemma for path length i (true when lemmas are off or unproven).
  term::Term lemma(const smt::Encoder& enc, unsigned i) const;

  const symexec::ContractModel& m_;
  const interp::Interpreter& in_;
  CheckOptions opt_;
  mutable std::optional<bool> conserves_;
};

/// Human report: verdict line, then for violations the numbered event
/// transcript, the transactions and the focus line.
std::string format_result(const CheckResult& r, const symexec::ContractModel& m);

nlohmann::json result_to_json(const CheckResult& r, const symexec::ContractModel& m);

} // namespace solbmc::checker
