#include "doctest.h"
#include "harness.hpp"

#include <algorithm>

using namespace solbmc;
using namespace solbmc::testing;
using checker::Verdict;

namespace {

checker::CheckOptions options(unsigned kmax, unsigned kmin = 0)
{
  checker::CheckOptions o;
  o.solver = solver_options(300);
  o.kmax = kmax;
  o.kmaxSet = true;
  o.kmin = kmin;
  o.kminSet = kmin != 0;
  return o;
}

checker::CheckResult run(const Bundle& b, const std::string& name, const checker::CheckOptions& o)
{
  checker::Checker ck(*b.model, *b.interp, o);
  return ck.check(b.property(name));
}

std::vector<std::string> tx_names(const model::CounterExample& ce)
{
  std::vector<std::string> out;
  for (const auto& s : ce.steps) {
    if (s.tx)
      out.push_back(s.tx->fname);
  }
  return out;
}

} // namespace

TEST_CASE("trivial invariant holds" * doctest::skip(!solver_available()))
{
  auto b = make_bundle(read_text(corpus_path("empty.sol")), config(8, 2), "property T: invariant true");
  auto r = run(b, "T", options(4));
  CHECK(r.verdict == Verdict::Holds);
  CHECK_FALSE(r.ce);
}

TEST_CASE("InvDaoBalance on the fixed and buggy contracts" * doctest::skip(!solver_available()))
{
  auto fixed = load_bundle("MiniDAO.sol", config(8, 2), "minidao.prop");
  auto r = run(fixed, "InvDaoBalance", options(6));
  CHECK(r.verdict == Verdict::Holds);

  auto buggy = load_bundle("MiniDAO_buggy.sol", config(8, 2), "minidao.prop");
  auto v = run(buggy, "InvDaoBalance", options(6));
  REQUIRE(v.verdict == Verdict::Violated);
  CHECK(v.transition == "vote");
  REQUIRE(v.ce);
  CHECK(v.confirmed());
}

TEST_CASE("alive as invariant and as trace property" * doctest::skip(!solver_available()))
{
  auto counter = make_bundle(read_text(corpus_path("fixtures/Counter.sol")), config(4, 2),
                             "property A: invariant alive\nproperty T: trace alive");
  CHECK(run(counter, "A", options(4)).verdict == Verdict::Holds);
  CHECK(run(counter, "T", options(4)).verdict == Verdict::Holds);

  auto kill = load_bundle("fixtures/Kill.sol", config(4, 2), "fixtures/kill.prop");
  auto inv = run(kill, "Alive", options(4));
  REQUIRE(inv.verdict == Verdict::Violated);
  CHECK(inv.transition == "kill");
  CHECK(inv.confirmed());

  auto tr = run(kill, "AliveTrace", options(4));
  REQUIRE(tr.verdict == Verdict::Violated);
  REQUIRE(tr.ce);
  CHECK(tr.ce->length() == 1);
  CHECK(tx_names(*tr.ce) == std::vector<std::string>{"kill"});
  CHECK(tr.confirmed());
}

TEST_CASE("a zero bound checks only the initial state" * doctest::skip(!solver_available()))
{
  auto kill = load_bundle("fixtures/Kill.sol", config(4, 2), "fixtures/kill.prop");
  auto r = run(kill, "AliveTrace", options(0));
  CHECK(r.verdict == Verdict::Holds);
  CHECK(r.bound == 0);
}

TEST_CASE("RejectedNotExecuted holds on a small model" * doctest::skip(!solver_available()))
{
  auto b = load_bundle("MiniDAO.sol", config(8, 2), "minidao.prop");
  auto r = run(b, "RejectedNotExecuted", options(6));
  CHECK(r.verdict == Verdict::Holds);
}

TEST_CASE("event chains" * doctest::skip(!solver_available()))
{
  const std::string src = R"(contract C {
    event A(uint x);
    event B(uint x);
    event E(uint x);
    function a(uint x) public { emit A(x); }
    function b(uint x) public { emit B(x); }
  })";
  auto b = make_bundle(src, config(4, 2),
                       "property Same: chain forbid A between A and A\n"
                       "property Never: chain forbid E between A and B\n"
                       "property Bound: chain forbid B(x) between A(x) and A(x)\n");
  auto same = run(b, "Same", options(5));
  REQUIRE(same.verdict == Verdict::Violated);
  REQUIRE(same.ce);
  CHECK(same.ce->length() == 3);
  CHECK(tx_names(*same.ce) == std::vector<std::string>{"a", "a", "a"});
  REQUIRE(same.ce->witness);
  CHECK(same.ce->witness->m < same.ce->witness->q);
  CHECK(same.ce->witness->q < same.ce->witness->n);
  CHECK(same.confirmed());

  CHECK(run(b, "Never", options(5)).verdict == Verdict::Holds);

  auto bound = run(b, "Bound", options(5));
  REQUIRE(bound.verdict == Verdict::Violated);
  REQUIRE(bound.ce);
  const auto& st = bound.ce->steps;
  const auto& w = *bound.ce->witness;
  CHECK(st[w.m].tx->args == st[w.q].tx->args);
  CHECK(st[w.q].tx->args == st[w.n].tx->args);
  CHECK(bound.confirmed());
}

TEST_CASE("call possibilities" * doctest::skip(!solver_available()))
{
  const std::string src = R"(contract C {
    bool open;
    event Opened();
    event Closed();
    function start() public { open = true; emit Opened(); }
    function stop() public { emit Closed(); }
    function use() public { require(open); }
    function ping() public {}
  })";
  auto b = make_bundle(src, config(4, 2),
                       "property Ping: between Opened and Closed call ping() is always possible where msg.value == 0\n"
                       "property AnyValue: between Opened and Closed call ping() is always possible\n"
                       "property Use: between Closed and Opened call use() is always possible\n"
                       "property Never: between Opened and Closed call use() is never possible\n");
  CHECK(run(b, "Ping", options(4, 3)).verdict == Verdict::Holds);
  // ping is not payable
  CHECK(run(b, "AnyValue", options(4, 3)).verdict == Verdict::Violated);

  auto use = run(b, "Use", options(4, 3));
  REQUIRE(use.verdict == Verdict::Violated);
  REQUIRE(use.ce);
  REQUIRE(use.ce->probe);
  CHECK(use.ce->probe->fname == "use");
  CHECK(use.confirmed());

  auto never = run(b, "Never", options(4, 3));
  REQUIRE(never.verdict == Verdict::Violated);
  CHECK(never.confirmed());
}

TEST_CASE("NotVotedRefund on a small model" * doctest::skip(!solver_available()))
{
  auto b = load_bundle("MiniDAO.sol", config(8, 2), "minidao.prop");
  auto r = run(b, "NotVotedRefund", options(8, 6));
  REQUIRE(r.verdict == Verdict::Violated);
  REQUIRE(r.ce);
  CHECK(r.ce->length() <= 6);
  auto names = tx_names(*r.ce);
  REQUIRE(names.size() >= 5);
  CHECK(names[0] == "deposit");
  CHECK(std::count(names.begin(), names.end(), "propose") == 1);
  CHECK(std::count(names.begin(), names.end(), "vote") >= 1);
  CHECK(std::count(names.begin(), names.end(), "execute_proposal") == 1);
  CHECK(r.confirmed());

  auto text = checker::format_result(r, *b.model);
  CHECK(text.find("NotVotedRefund") != std::string::npos);
  CHECK(text.find("violated") != std::string::npos);
  CHECK(text.find("Deposited(") != std::string::npos);
  auto j = checker::result_to_json(r, *b.model);
  CHECK(j["verdict"] == "violated");
  CHECK(j.contains("counterexample"));
  auto back = model::trace_from_json(j["counterexample"], *b.ast, b.interp->layout(), b.interp->addrs());
  CHECK(back == *r.ce);
}
