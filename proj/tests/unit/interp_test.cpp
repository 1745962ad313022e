#include "doctest.h"
#include "harness.hpp"

using namespace solbmc;
using namespace solbmc::testing;

namespace {

Word slot(const interp::Interpreter& in, const model::SystemState& s, const std::string& name)
{
  return s.vars.at(*in.layout().find(name));
}

} // namespace

TEST_CASE("deposit moves value and emits")
{
  auto b = load_bundle("MiniDAO.sol", config(16, 3));
  const auto& in = *b.interp;
  auto s0 = in.construct({{}, 1, 0}, {0, 50, 0, 0, 0}, 0);
  auto out = in.exec_tx(s0, {"deposit", 5, 1, 1, {}});
  REQUIRE(out.committed);
  CHECK(out.state.balances[1] == 45);
  CHECK(out.state.balances[4] == 5);
  CHECK(slot(in, out.state, "daoBalance[addr1]") == 5);
  CHECK(slot(in, out.state, "daoTokensEmitted") == 5);
  REQUIRE(out.state.event);
  CHECK(out.state.event->tag == "Deposited");
  CHECK(out.state.event->args == std::vector<Word>{1, 5});
  CHECK(out.state.blocktime == 1);

  auto broke = in.exec_tx(s0, {"deposit", 51, 1, 1, {}});
  CHECK_FALSE(broke.committed);
  CHECK(broke.reason == interp::RevertReason::InsufficientFunds);
  CHECK(broke.state == s0);
  CHECK(in.exec_tx(s0, {"deposit", 0, 1, 1, {}}).reason == interp::RevertReason::Require);
  CHECK(in.exec_tx(s0, {"refund", 1, 1, 1, {}}).reason == interp::RevertReason::NotPayable);
}

TEST_CASE("a voter cannot refund")
{
  auto b = load_bundle("MiniDAO.sol", config(16, 3));
  const auto& in = *b.interp;
  auto s = in.construct({{}, 1, 0}, {0, 50, 50, 0, 0}, 0);
  for (const model::TxParams& tx : std::vector<model::TxParams>{
           {"deposit", 10, 1, 1, {}}, {"deposit", 10, 2, 2, {}}, {"propose", 0, 2, 3, {3, 5}}, {"vote", 0, 1, 4, {1, 1}}}) {
    auto out = in.exec_tx(s, tx);
    REQUIRE(out.committed);
    s = out.state;
  }
  auto voter = in.exec_tx(s, {"refund", 0, 1, 5, {}});
  CHECK_FALSE(voter.committed);
  CHECK(voter.reason == interp::RevertReason::Require);
  auto other = in.exec_tx(s, {"refund", 0, 2, 5, {}});
  REQUIRE(other.committed);
  CHECK(other.state.balances[2] == 50);
  CHECK(other.state.event->tag == "Refund");

  auto self = in.exec_tx(s, {"refund", 0, in.addrs().contract(), 5, {}});
  CHECK_FALSE(self.committed);
  CHECK(self.reason == interp::RevertReason::SelfCall);
}

TEST_CASE("selfdestruct and liveness")
{
  auto b = load_bundle("fixtures/Kill.sol", config(8, 2));
  const auto& in = *b.interp;
  auto s = in.construct({{}, 2, 0}, {0, 0, 0, 9}, 0);
  CHECK(slot(in, s, "owner") == 2);
  auto dead = in.exec_tx(s, {"kill", 0, 1, 1, {}});
  REQUIRE(dead.committed);
  CHECK_FALSE(dead.state.alive);
  CHECK(dead.state.balances[1] == 9);
  CHECK(dead.state.balances[3] == 0);
  CHECK(in.exec_tx(dead.state, {"poke", 0, 1, 2, {}}).reason == interp::RevertReason::NotAlive);
}

TEST_CASE("arithmetic wraps and divides safely")
{
  auto b = load_bundle("fixtures/Divider.sol", config(4, 2));
  const auto& in = *b.interp;
  auto s = in.construct({}, {0, 0, 0, 0}, 0);
  auto g = in.exec_tx(s, {"g", 0, 1, 1, {3}});
  REQUIRE(g.committed);
  CHECK(in.exec_tx(s, {"g", 0, 1, 1, {0}}).reason == interp::RevertReason::DivisionByZero);

  auto c = load_bundle("fixtures/Counter.sol", config(2, 1));
  auto cs = c.interp->construct({}, {0, 0, 0}, 0);
  for (int i = 0; i < 4; ++i)
    cs = c.interp->exec_tx(cs, {"inc", 0, 1, Word(i), {}}).state;
  CHECK(cs.vars[0] == 0);
}

TEST_CASE("replay")
{
  auto b = load_bundle("MiniDAO.sol", config(16, 3));
  const auto& in = *b.interp;
  model::CounterExample ce;
  ce.ctor.sender = 1;
  ce.steps.push_back({std::nullopt, in.construct(ce.ctor, {0, 20, 0, 0, 0}, 0)});
  CHECK(interp::replay(ce, in).confirmed);

  auto out = in.exec_tx(ce.steps[0].state, {"deposit", 7, 1, 3, {}});
  ce.steps.push_back({model::TxParams{"deposit", 7, 1, 3, {}}, out.state});
  CHECK(interp::replay(ce, in).confirmed);

  auto bad = ce;
  bad.steps[1].state.balances[1] += 1;
  auto r = interp::replay(bad, in);
  CHECK_FALSE(r.confirmed);
  REQUIRE(r.steps.size() >= 2);
  CHECK_FALSE(r.steps[1].stateMatch);

  auto reverting = ce;
  reverting.steps[1].tx->value = 0;
  auto rr = interp::replay(reverting, in);
  CHECK_FALSE(rr.confirmed);
  CHECK_FALSE(rr.steps[1].committed);

  auto wrongEvent = ce;
  wrongEvent.steps[1].state.event->args[1] = 8;
  CHECK_FALSE(interp::replay(wrongEvent, in).confirmed);
}

TEST_CASE("parameter domains")
{
  auto b = load_bundle("fixtures/Phases.sol", config(3, 2));
  CHECK(interp::domain_of(frontend::SolType::uint(), *b.interp).size() == 8);
  CHECK(interp::domain_of(frontend::SolType::address(), *b.interp).size() == 4);
  CHECK(interp::domain_of(frontend::SolType::boolean(), *b.interp) == std::vector<Word>{0, 1});
}

TEST_CASE("reachable states")
{
  auto e = load_bundle("empty.sol", config(2, 1));
  auto init = e.interp->construct({}, {0, 0, 0}, 0);
  CHECK(interp::enumerate_reachable(*e.interp, init, 3) == std::set<model::SystemState>{init});

  auto c = load_bundle("fixtures/Counter.sol", config(2, 1));
  auto cinit = c.interp->construct({}, {0, 0, 0}, 0);
  auto reach = interp::enumerate_reachable(*c.interp, cinit, 3);
  std::set<Word> values;
  for (const auto& s : reach)
    values.insert(s.vars[0]);
  CHECK(values == std::set<Word>{0, 1, 2, 3});
  CHECK(interp::enumerate_reachable(*c.interp, cinit, 0).size() == 1);
}

TEST_CASE("reachable states agree with the solver" * doctest::skip(!solver_available()))
{
  for (const char* f : {"fixtures/Counter.sol", "fixtures/Kill.sol"}) {
    CAPTURE(f);
    auto b = load_bundle(f, config(2, 1));
    std::vector<Word> bal(b.interp->addrs().size(), 0);
    bal[1] = 1;
    for (unsigned k = 0; k <= 2; ++k) {
      CAPTURE(k);
      // the solver leaves the constructor sender free
      std::set<model::SystemState> concrete;
      for (unsigned sender = 1; sender <= b.cfg.addrCount; ++sender) {
        auto r = interp::enumerate_reachable(*b.interp, b.interp->construct({{}, sender, 0}, bal, 0), k);
        concrete.insert(r.begin(), r.end());
      }
      auto symbolic = smt_reachable(b, bal, 0, k);
      for (const auto& st : symbolic) {
        if (!concrete.count(st))
          MESSAGE("solver only: " << model::format_state(st, b.interp->layout(), b.interp->addrs()));
      }
      for (const auto& st : concrete) {
        if (!symbolic.count(st))
          MESSAGE("interpreter only: " << model::format_state(st, b.interp->layout(), b.interp->addrs()));
      }
      CHECK(concrete == symbolic);
    }
  }
}

TEST_CASE("fuzzing checks invariants on committed states")
{
  auto b = load_bundle("MiniDAO.sol", config(8, 3), "minidao.prop");
  const auto& inv = b.property("InvDaoBalance");
  spec::EvalEnv env;
  env.ast = b.ast.get();
  env.layout = &b.model->layout;
  env.addrs = &b.model->addrs;
  env.width = 8;
  auto check = [&](const model::SystemState& s) {
    return spec::evaluate(*inv.pred, s, env) ? std::string() : std::string("InvDaoBalance");
  };
  interp::FuzzOptions o;
  o.seed = 5;
  o.runs = 50;
  auto rep = interp::fuzz(*b.interp, o, check);
  CHECK(rep.committed > 0);
  CHECK(rep.failures.empty());

  auto buggy = load_bundle("MiniDAO_buggy.sol", config(8, 3), "minidao.prop");
  env.ast = buggy.ast.get();
  env.layout = &buggy.model->layout;
  env.addrs = &buggy.model->addrs;
  o.runs = 400;
  o.length = 20;
  auto brep = interp::fuzz(*buggy.interp, o, [&](const model::SystemState& s) {
    return spec::evaluate(*buggy.property("InvDaoBalance").pred, s, env) ? std::string() : std::string("InvDaoBalance");
  });
  CHECK_FALSE(brep.failures.empty());
}
