#include "doctest.h"
#include "harness.hpp"

#include <chrono>
#include <filesystem>

using namespace solbmc;
using namespace solbmc::testing;
using term::Input;
using term::InputKind;

namespace {

std::string print_with(const frontend::ContractAst& ast, const frontend::FunDecl& f)
{
  auto copy = ast;
  for (auto& g : copy.functions) {
    if (g.name == f.name)
      g = f;
  }
  return frontend::print_contract(copy);
}

int count_calls(const frontend::Expr* e)
{
  if (!e)
    return 0;
  int n = e->kind == frontend::ExprKind::Call && !e->args.empty() && e->args[0]->ref == frontend::RefKind::Function;
  for (const auto& a : e->args)
    n += count_calls(a.get());
  return n;
}

int count_calls(const frontend::Stmt* s)
{
  if (!s)
    return 0;
  int n = count_calls(s->expr.get()) + count_calls(s->then.get()) + count_calls(s->els.get()) +
          count_calls(s->init.get()) + count_calls(s->post.get());
  for (const auto& c : s->stmts)
    n += count_calls(c.get());
  return n;
}

/// Evaluates a transition term with explicit inputs.
struct Env {
  std::vector<Word> slots;
  bool alive = true;
  std::vector<Word> balances;
  Word blocktime = 0, value = 0, time = 0;
  unsigned sender = 1;
  std::vector<Word> args;

  Word eval(const term::Term& t) const
  {
    return term::eval(t, [&](const Input& in, const term::Sort&) -> Word {
      switch (in.kind) {
      case InputKind::Slot:
        return slots.at(in.index);
      case InputKind::Alive:
        return alive;
      case InputKind::Balance:
        return balances.at(in.index);
      case InputKind::Blocktime:
        return blocktime;
      case InputKind::Value:
        return value;
      case InputKind::Sender:
        return sender;
      case InputKind::Time:
        return time;
      case InputKind::Arg:
        return args.at(in.index);
      default:
        return 0;
      }
    });
  }
};

std::vector<std::string> fixture_files()
{
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_path("fixtures"))) {
    if (e.path().extension() == ".sol")
      out.push_back("fixtures/" + e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("inlining")
{
  auto ast = parse_contract(
      "contract C { uint y; function g(uint x) internal returns (uint) { return x + 1; } function f() public { y = g(2); } }");
  auto f = symexec::inline_internal_calls(*ast.find_function("f"), ast);
  CHECK(print_with(ast, f).find("y = (2 + 1);") != std::string::npos);
  CHECK(count_calls(f.body.get()) == 0);

  auto plain = parse_contract("contract C { uint y; function f() public { y = y + 1; } }");
  auto same = symexec::inline_internal_calls(*plain.find_function("f"), plain);
  CHECK(frontend::equal_stmt(same.body.get(), plain.find_function("f")->body.get()));

  auto nested = load_contract("fixtures/Helpers.sol");
  CHECK(count_calls(nested.find_function("f")->body.get()) == 1);
  auto flat = symexec::inline_internal_calls(*nested.find_function("f"), nested);
  CHECK(count_calls(flat.body.get()) == 0);
}

TEST_CASE("two emits on one path are rejected")
{
  auto ast = parse_contract("contract C { event E(uint a); function f() public { emit E(1); emit E(2); } }");
  CHECK(symexec::max_emits_per_path(*ast.find_function("f"), ast) == 2);
  CHECK_THROWS_AS(symexec::build_model(ast, config(8, 2)), ModelError);
  auto ok = parse_contract(
      "contract C { event E(uint a); function f(bool b) public { if (b) { emit E(1); } else { emit E(2); } } }");
  CHECK(symexec::max_emits_per_path(*ok.find_function("f"), ok) == 1);
}

TEST_CASE("collected events")
{
  auto dao = load_contract("MiniDAO.sol");
  auto ev = symexec::collect_events(dao);
  std::set<std::string> names;
  for (const auto* e : ev.events)
    names.insert(e->name);
  CHECK(names == std::set<std::string>{"Voted", "Refund", "Deposited", "ProposalAdded", "ProposalExecuted", "ProposalRejected"});
  CHECK(ev.name_of(0) == "NoEvent");
  for (unsigned t = 1; t <= ev.events.size(); ++t)
    CHECK(ev.tag_of(ev.name_of(t)) == t);

  auto unused = parse_contract("contract C { event A(uint a); event B(); function f() public { emit B(); } }");
  auto e2 = symexec::collect_events(unused);
  REQUIRE(e2.events.size() == 1);
  CHECK(e2.events[0]->name == "B");
  CHECK(symexec::collect_events(parse_contract("contract C { uint x; }")).events.empty());
}

TEST_CASE("the empty function")
{
  auto ast = parse_contract("contract C { uint x; bool b; function f() public {} }");
  auto m = symexec::build_model(ast, config(2, 2));
  const auto& f = m.functions.at(0);
  Env env;
  env.slots = {2, 1};
  env.balances = {0, 1, 3, 0};
  for (int alive = 0; alive < 2; ++alive) {
    for (unsigned v = 0; v < 4; ++v) {
      for (unsigned s = 0; s < 4; ++s) {
        env.alive = alive;
        env.value = v;
        env.sender = s;
        env.time = 3;
        bool expected = alive && v == 0 && s != m.addrs.contract() && env.balances[s] >= v;
        CHECK((env.eval(f.pre) != 0) == expected);
        CHECK(env.eval(f.slots[0]) == 2);
        CHECK(env.eval(f.slots[1]) == 1);
        CHECK(env.eval(f.eventTag) == 0);
        CHECK(env.eval(f.blocktime) == 3);
        for (std::size_t a = 0; a < 4; ++a)
          CHECK(env.eval(f.balances[a]) == env.balances[a]);
      }
    }
  }
}

TEST_CASE("division requires a non-zero divisor")
{
  auto b = load_bundle("fixtures/Divider.sol", config(4, 2));
  const auto* g = b.model->find_function("g");
  REQUIRE(g);
  Env env;
  env.slots = {0, 0};
  env.balances = {0, 0, 0, 0};
  for (unsigned a = 0; a < 16; ++a) {
    env.args = {a};
    CHECK((env.eval(g->pre) != 0) == (a != 0));
    auto out = b.interp->exec_tx(b.interp->construct({}, env.balances, 0), {"g", 0, 1, 1, {a}});
    CHECK(out.committed == (a != 0));
  }
}

TEST_CASE("MiniDAO refund precondition")
{
  auto b = load_bundle("MiniDAO.sol", config(8, 2));
  const auto& m = *b.model;
  const auto* refund = m.find_function("refund");
  REQUIRE(refund);
  const auto& l = m.layout;
  auto slot = [&](const std::string& n) { return *l.find(n); };
  Env env;
  env.slots.assign(l.size(), 0);
  env.balances = {0, 0, 0, 100};
  env.sender = 1;
  env.slots[slot("daoBalance[addr1]")] = 40;
  env.slots[slot("daoTokensEmitted")] = 60;
  CHECK(env.eval(refund->pre) != 0);
  auto with = [&](auto change) {
    Env e = env;
    change(e);
    return e.eval(refund->pre) != 0;
  };
  CHECK_FALSE(with([&](Env& e) { e.slots[slot("isVoted[0][addr1]")] = 1; }));
  CHECK_FALSE(with([&](Env& e) { e.slots[slot("daoBalance[addr1]")] = 0; }));
  CHECK_FALSE(with([&](Env& e) { e.slots[slot("daoTokensEmitted")] = 39; }));
  CHECK_FALSE(with([&](Env& e) { e.balances[3] = 39; }));
  CHECK_FALSE(with([&](Env& e) { e.alive = false; }));
  CHECK_FALSE(with([&](Env& e) { e.value = 1; }));
  CHECK(with([&](Env& e) { e.slots[slot("isVoted[0][addr2]")] = 1; }));
}

TEST_CASE("initial state")
{
  auto none = parse_contract("contract C { uint price; bool b; address a; }");
  auto m = symexec::build_model(none, config(8, 2));
  for (const auto& t : m.init.varInit) {
    REQUIRE(t->is_const());
    CHECK(t->value == 0);
  }
  auto priced = parse_contract("contract C { uint price; uint other; constructor() public { price = 2; } }");
  auto m2 = symexec::build_model(priced, config(8, 2));
  CHECK(m2.init.varInit[0]->value == 2);
  CHECK(m2.init.varInit[1]->value == 0);
}

TEST_CASE("pre and update agree with the interpreter on every fixture (W=3, exhaustive)")
{
  for (const auto& f : fixture_files()) {
    CAPTURE(f);
    auto b = load_bundle(f, config(3, 2));
    auto st = differential(b);
    for (const auto& e : st.examples)
      MESSAGE(e);
    CHECK(st.cases > 0);
    CHECK(st.committed > 0);
    CHECK(st.reverted > 0);
    CHECK(st.preMismatch == 0);
    CHECK(st.postMismatch == 0);
  }
}

TEST_CASE("pre and update agree with the interpreter on MiniDAO (sampled)")
{
  for (const char* f : {"MiniDAO.sol", "MiniDAO_buggy.sol"}) {
    auto b = load_bundle(f, config(4, 2));
    auto st = differential_sampled(b, 200000, 11);
    for (const auto& e : st.examples)
      MESSAGE(e);
    CHECK(st.committed > 1000);
    CHECK(st.preMismatch == 0);
    CHECK(st.postMismatch == 0);
  }
}
