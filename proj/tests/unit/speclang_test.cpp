#include "doctest.h"
#include "harness.hpp"

#include <random>

using namespace solbmc;
using namespace solbmc::testing;
using term::Input;
using term::InputKind;

namespace {

spec::SpecResult parse_on(const frontend::ContractAst& ast, const std::string& text, unsigned width = 16)
{
  return spec::parse_spec(text, ast, config(width, 3));
}

Word eval_lowered(const term::Term& t, const model::SystemState& s, const std::map<std::string, Word>& named = {})
{
  return term::eval(t, [&](const Input& in, const term::Sort&) -> Word {
    switch (in.kind) {
    case InputKind::Slot:
      return s.vars.at(in.index);
    case InputKind::Alive:
      return s.alive;
    case InputKind::Balance:
      return s.balances.at(in.index);
    case InputKind::Blocktime:
      return s.blocktime;
    case InputKind::Named:
      return named.at(in.name);
    default:
      throw std::logic_error("unexpected input");
    }
  });
}

model::SystemState random_state(const symexec::ContractModel& m, std::mt19937_64& rng)
{
  model::SystemState s;
  Word mask = width_mask(m.width());
  for (std::size_t i = 0; i < m.layout.size(); ++i) {
    const auto& sl = m.layout[i];
    switch (sl.sort) {
    case model::ScalarSort::Bool:
      s.vars.push_back(rng() % 2);
      break;
    case model::ScalarSort::Addr:
      s.vars.push_back(rng() % m.addrs.size());
      break;
    case model::ScalarSort::Enum:
      s.vars.push_back(rng() % sl.enumSize);
      break;
    default:
      // small values often, so equalities hold sometimes
      s.vars.push_back(rng() % 2 ? Word(rng() % 4) : Word(rng()) & mask);
    }
  }
  s.alive = rng() % 2;
  for (std::size_t a = 0; a < m.addrs.size(); ++a)
    s.balances.push_back(Word(rng()) & mask);
  s.blocktime = Word(rng()) & mask;
  return s;
}

} // namespace

TEST_CASE("MiniDAO properties parse")
{
  auto b = load_bundle("MiniDAO.sol", config(16, 3), "minidao.prop");
  REQUIRE(b.properties.size() == 3);

  const auto& inv = b.property("InvDaoBalance");
  CHECK(inv.kind == spec::PropKind::Invariant);
  REQUIRE(inv.pred);
  CHECK(inv.pred->kind == spec::PKind::Binary);
  CHECK(inv.pred->op == "==");
  CHECK(inv.pred->args[0]->kind == spec::PKind::Sum);
  CHECK_FALSE(inv.pred->args[0]->userOnly);

  const auto& chain = b.property("RejectedNotExecuted");
  CHECK(chain.kind == spec::PropKind::EventChain);
  CHECK(chain.e1.event == "ProposalAdded");
  CHECK(chain.e2.event == "ProposalRejected");
  CHECK(chain.e3.event == "ProposalExecuted");
  CHECK(chain.e1.args[0].kind == spec::PatArg::Kind::Binder);
  CHECK(chain.e1.args[1].kind == spec::PatArg::Kind::Wildcard);
  CHECK(chain.e2.args[0].name == "id");
  CHECK(chain.e3.args[0].name == "id");
  CHECK(chain.binders.at("id") == spec::PType::Uint);

  const auto& call = b.property("NotVotedRefund");
  CHECK(call.kind == spec::PropKind::CallPossibility);
  CHECK(call.fname == "refund");
  CHECK(call.always);
  CHECK(call.binders.at("inv") == spec::PType::Addr);
  REQUIRE(call.where);
}

TEST_CASE("trivial and explicit forms")
{
  auto ast = load_contract("MiniDAO.sol");
  auto r = parse_on(ast, "invariant true\nproperty T: trace(5) daoTokensEmitted >= 0\n"
                         "chain forbid ProposalExecuted between ProposalAdded and ProposalRejected\n"
                         "property N: between ProposalAdded(_, a) and ProposalRejected(_) call vote(_, true) is never possible where a > 3\n");
  REQUIRE(r.ok());
  REQUIRE(r.properties.size() == 4);
  CHECK(r.properties[0].pred->kind == spec::PKind::BoolLit);
  CHECK(r.properties[0].pred->value == 1);
  CHECK(r.properties[1].name == "T");
  CHECK(r.properties[1].traceK == 5);
  CHECK(r.properties[2].e1.args.size() == 2);
  CHECK(r.properties[2].e1.args[0].kind == spec::PatArg::Kind::Wildcard);
  CHECK_FALSE(r.properties[3].always);
  CHECK(r.properties[3].callArgs[1].kind == spec::PatArg::Kind::Literal);
  CHECK(r.properties[3].callArgs[1].value == 1);
}

TEST_CASE("specification errors")
{
  auto ast = load_contract("MiniDAO.sol");
  auto bad = [&](const std::string& text) {
    auto r = parse_on(ast, text);
    CAPTURE(text);
    CHECK_FALSE(r.ok());
    return r.diagnostics;
  };
  bad("invariant nosuchvar == 1");
  bad("invariant daoBalance == 1");
  bad("invariant daoTokensEmitted == 70000");
  bad("invariant msg.sender == addr1");
  bad("invariant daoBalance[addr4] == 0");
  bad("chain forbid NoSuch between Deposited and Refund");
  bad("chain forbid Refund(x, y, z) between Deposited and Refund");
  bad("chain forbid Refund(x, _) between Deposited(_, x) and Refund");
  bad("between Deposited and Refund call nosuch() is always possible");
  bad("between Deposited and Refund call vote(1) is always possible");
  bad("trace(0) true");
  bad("invariant SUM a in Addr: daoBalance[a] == 0 && a == addr1");
  bad("property A: invariant true\nproperty A: invariant true");

  auto ds = bad("invariant nosuch\nproperty Ok: invariant true\ninvariant other");
  CHECK(ds.size() == 2);
  CHECK(ds[0].span.line == 1);
  CHECK(ds[1].span.line == 3);
}

TEST_CASE("an all-wildcard chain only constrains event tags")
{
  auto b = make_bundle(read_text(corpus_path("MiniDAO.sol")), config(8, 2),
                       "chain forbid ProposalExecuted between ProposalAdded and ProposalRejected");
  auto lp = spec::lower_property(b.properties[0], *b.model);
  for (const auto& t : {lp.e1, lp.e2, lp.e3}) {
    auto ins = term::free_inputs(t);
    REQUIRE(ins.size() == 1);
    CHECK(ins[0].first.kind == InputKind::EventTag);
  }
  CHECK(lp.where->is_true());
}

TEST_CASE("a call-possibility property lowers onto refund's inputs")
{
  auto b = load_bundle("MiniDAO.sol", config(16, 3), "minidao.prop");
  auto lp = spec::lower_property(b.property("NotVotedRefund"), *b.model);
  REQUIRE(lp.fn);
  CHECK(lp.fn->fname == "refund");
  REQUIRE(lp.binders.size() == 1);
  CHECK(lp.binders[0]->input.name == spec::binder_var_name("inv"));
  bool sender = false, value = false, binder = false;
  for (const auto& [in, sort] : term::free_inputs(lp.where)) {
    sender = sender || in.kind == InputKind::Sender;
    value = value || in.kind == InputKind::Value;
    binder = binder || (in.kind == InputKind::Named && in.name == "bind_inv");
  }
  CHECK(sender);
  CHECK(value);
  CHECK(binder);
}

TEST_CASE("lowered predicates agree with direct evaluation on random states")
{
  const std::string props = R"(
    invariant SUM a in Addr: daoBalance[a] == daoTokensEmitted
    invariant SUM a in UserAddr: daoBalance[a] + balance[a] >= votesFor - votesAgainst * 2
    invariant proposalState == ProposalState.Active || !isVoted[0][addr1] && alive
    invariant proposalRecipient != addr2 || currentProposalId % 3 == blocktime / 5
    invariant balance[this] - proposalAmount < 7 && -votesFor != 1
  )";
  for (unsigned w : {4u, 16u}) {
    auto b = make_bundle(read_text(corpus_path("MiniDAO.sol")), config(w, 3), props);
    spec::EvalEnv env;
    env.ast = b.ast.get();
    env.layout = &b.model->layout;
    env.addrs = &b.model->addrs;
    env.width = w;
    std::mt19937_64 rng(w);
    for (const auto& p : b.properties) {
      term::Term t = spec::lower_pred(*p.pred, *b.model, {});
      for (int n = 0; n < 100; ++n) {
        auto s = random_state(*b.model, rng);
        CHECK(eval_lowered(t, s) == spec::evaluate(*p.pred, s, env));
      }
    }
  }
}

TEST_CASE("event patterns bind and check binders")
{
  auto b = load_bundle("MiniDAO.sol", config(16, 3), "minidao.prop");
  const auto& chain = b.property("RejectedNotExecuted");
  spec::EvalEnv env;
  env.ast = b.ast.get();
  env.layout = &b.model->layout;
  env.addrs = &b.model->addrs;
  env.width = 16;
  model::EventInstance added{"ProposalAdded", {4, 100}};
  model::EventInstance rejected4{"ProposalRejected", {4}};
  model::EventInstance rejected5{"ProposalRejected", {5}};
  CHECK(spec::match_event(chain.e1, added, env));
  CHECK(env.binders.at("id") == 4);
  CHECK(spec::match_event(chain.e2, rejected4, env));
  CHECK_FALSE(spec::match_event(chain.e2, rejected5, env));
  CHECK_FALSE(spec::match_event(chain.e2, std::nullopt, env));
  CHECK_FALSE(spec::match_event(chain.e1, rejected4, env));

  // the lowered pattern agrees
  auto e1 = spec::lower_pattern(chain.e1, chain, *b.model);
  auto tag = *b.model->events.tag_of("ProposalAdded");
  auto at = [&](unsigned t, Word a0, Word bind) {
    return term::eval(e1, [&](const Input& in, const term::Sort&) -> Word {
      if (in.kind == InputKind::EventTag)
        return t;
      if (in.kind == InputKind::EventArg)
        return in.index == 0 ? a0 : Word(100);
      return bind;
    });
  };
  CHECK(at(tag, 4, 4) == 1);
  CHECK(at(tag, 4, 5) == 0);
  CHECK(at(tag + 1, 4, 4) == 0);
}
