// Acceptance run: one PASS/FAIL line per criterion, with timings.
#include "harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <regex>
#include <sstream>

using namespace solbmc;
using namespace solbmc::testing;
using checker::Verdict;

namespace {

struct Outcome {
  bool pass = false;
  std::string note;
};

checker::CheckOptions options(unsigned kmax, unsigned kmin = 0, double timeout = 900)
{
  checker::CheckOptions o;
  o.solver = solver_options(timeout);
  o.kmax = kmax;
  o.kmaxSet = true;
  o.kmin = kmin;
  o.kminSet = kmin != 0;
  return o;
}

std::vector<std::string> event_names(const model::CounterExample& ce)
{
  std::vector<std::string> out;
  for (std::size_t i = 1; i < ce.steps.size(); ++i)
    out.push_back(ce.steps[i].state.event ? ce.steps[i].state.event->tag : "NoEvent");
  return out;
}

std::string join(const std::vector<std::string>& v)
{
  std::string s;
  for (const auto& x : v)
    s += (s.empty() ? "" : ", ") + x;
  return s;
}

std::vector<std::string> fixtures(bool withSelfdestruct)
{
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_path("fixtures"))) {
    if (e.path().extension() != ".sol")
      continue;
    if (!withSelfdestruct && read_text(e.path().string()).find("selfdestruct") != std::string::npos)
      continue;
    out.push_back("fixtures/" + e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// counter-examples collected by criteria 1 and 2 for criterion 7
struct Replayable {
  std::string label;
  const Bundle* bundle;
  model::CounterExample ce;
  bool violationConfirmed;
};

std::vector<std::unique_ptr<Bundle>> keep;
std::vector<Replayable> collected;

const Bundle& hold(Bundle b)
{
  keep.push_back(std::make_unique<Bundle>(std::move(b)));
  return *keep.back();
}

Outcome c1()
{
  const auto& b = hold(load_bundle("MiniDAO.sol", config(16, 3), "minidao.prop"));
  auto start = std::chrono::steady_clock::now();
  auto r = checker::Checker(*b.model, *b.interp, options(8, 6)).check(b.property("NotVotedRefund"));
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.verdict != Verdict::Violated || !r.ce)
    return {false, std::string(checker::verdict_name(r.verdict)) + ": " + r.detail};
  collected.push_back({"NotVotedRefund", &b, *r.ce, r.violationConfirmed});
  auto ev = event_names(*r.ce);
  std::vector<std::string> shape{"Deposited", "Deposited", "ProposalAdded", "Voted", "ProposalExecuted"};
  bool shaped = ev.size() >= 5 && std::equal(shape.begin(), shape.end(), ev.begin()) &&
                (ev.size() == 5 || (ev.size() == 6 && ev[5] == "Deposited"));
  bool ok = r.ce->length() <= 6 && shaped && r.confirmed() && secs <= 600;
  return {ok, std::to_string(r.ce->length()) + " txs: " + join(ev) + (r.confirmed() ? "; replay confirmed" : "; not confirmed")};
}

Outcome c2()
{
  const auto& buggy = hold(load_bundle("MiniDAO_buggy.sol", config(16, 3), "minidao.prop"));
  const auto& fixed = hold(load_bundle("MiniDAO.sol", config(16, 3), "minidao.prop"));
  auto rb = checker::Checker(*buggy.model, *buggy.interp, options(12)).check(buggy.property("InvDaoBalance"));
  auto rf = checker::Checker(*fixed.model, *fixed.interp, options(12)).check(fixed.property("InvDaoBalance"));
  if (rb.ce)
    collected.push_back({"InvDaoBalance (buggy)", &buggy, *rb.ce, rb.violationConfirmed});
  bool ok = rb.verdict == Verdict::Violated && rb.transition == "vote" && rf.verdict == Verdict::Holds;
  return {ok, "buggy: " + std::string(checker::verdict_name(rb.verdict)) + " via " + rb.transition +
                  "; fixed: " + std::string(checker::verdict_name(rf.verdict))};
}

Outcome c3()
{
  auto b = load_bundle("MiniDAO.sol", config(16, 3), "minidao.prop");
  auto r = checker::Checker(*b.model, *b.interp, options(12)).check(b.property("RejectedNotExecuted"));
  return {r.verdict == Verdict::Holds && r.bound >= 11,
          std::string(checker::verdict_name(r.verdict)) + ", " + r.detail};
}

Outcome c4()
{
  auto files = fixtures(true);
  std::uint64_t cases = 0, mismatches = 0;
  std::string first;
  for (const auto& f : files) {
    auto b = load_bundle(f, config(4, 2));
    auto st = differential(b);
    cases += st.cases;
    mismatches += st.preMismatch + st.postMismatch;
    if (first.empty() && !st.examples.empty())
      first = f + ": " + st.examples[0];
    if (st.committed == 0 || st.reverted == 0)
      return {false, f + " never commits or never reverts"};
  }
  std::string note = std::to_string(files.size()) + " fixtures, " + std::to_string(cases) + " cases, " +
                     std::to_string(mismatches) + " mismatches";
  if (!first.empty())
    note += "; " + first;
  return {files.size() >= 5 && mismatches == 0, note};
}

Outcome c5()
{
  auto b = load_bundle("fixtures/Counter.sol", config(2, 2));
  std::vector<Word> bal(b.interp->addrs().size(), 0);
  bal[1] = 2;
  auto init = b.interp->construct({{}, 1, 0}, bal, 1);
  auto concrete = interp::enumerate_reachable(*b.interp, init, 3);
  auto symbolic = smt_reachable(b, bal, 1, 3);
  return {concrete == symbolic && !concrete.empty(),
          std::to_string(concrete.size()) + " states by enumeration, " + std::to_string(symbolic.size()) + " by the solver"};
}

Outcome c6()
{
  auto files = fixtures(false);
  for (const auto& f : files) {
    auto b = load_bundle(f, config(8, 2));
    smt::Encoder enc(*b.model);
    smt::Context ctx(*b.model, solver_options(600));
    ctx.assert_term(enc.conservation_violation());
    auto q = ctx.check({});
    if (q.status != smt::Status::Unsat)
      return {false, f + ": " + std::string(smt::status_name(q.status))};
  }
  return {!files.empty(), std::to_string(files.size()) + " fixtures unsat at W=8"};
}

Outcome c7()
{
  if (collected.size() < 2)
    return {false, "only " + std::to_string(collected.size()) + " counter-examples from criteria 1-2"};
  std::string note;
  bool ok = true;
  for (const auto& c : collected) {
    auto rep = interp::replay(c.ce, *c.bundle->interp);
    ok = ok && rep.confirmed && c.violationConfirmed;
    note += (note.empty() ? "" : "; ") + c.label + ": " + (rep.confirmed ? "confirmed" : "mismatch");
  }
  return {ok, note};
}

Outcome c8()
{
  std::regex expect(R"(// expect: rule (\d))");
  unsigned n = 0, cited = 0;
  std::string wrong;
  for (const auto& e : std::filesystem::directory_iterator(corpus_path("nonsol"))) {
    std::string src = read_text(e.path().string());
    std::smatch mt;
    if (!std::regex_search(src, mt, expect))
      continue;
    ++n;
    int rule = std::stoi(mt[1]);
    auto r = frontend::parse(src);
    bool hit = false;
    for (const auto& d : r.diagnostics)
      hit = hit || (d.kind == DiagKind::SubsetViolation && d.rule == rule);
    cited += hit;
    if (!hit)
      wrong += " " + e.path().filename().string();
  }
  return {n >= 10 && cited == n, std::to_string(cited) + "/" + std::to_string(n) + " snippets cite their rule" + wrong};
}

} // namespace

int main()
{
  if (!solver_available()) {
    std::cout << "no SMT solver found (set SOLBMC_SOLVER)\n";
    return 1;
  }
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 NotVotedRefund counter-example", c1},
      {"2 InvDaoBalance buggy/fixed", c2},
      {"3 RejectedNotExecuted to k=12", c3},
      {"4 precondition differential", c4},
      {"5 reachability agreement", c5},
      {"6 value conservation", c6},
      {"7 counter-examples replay", c7},
      {"8 non-Sol rule citations", c8},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s  criterion %s  (%.1f s)  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.note.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
