#include "doctest.h"
#include "harness.hpp"

using namespace solbmc;
using namespace solbmc::testing;
using namespace solbmc::term;

namespace {

const std::string kCounter = "contract C { uint counter; function inc() public { counter = counter + 1; } }";

/// Interpreter trace on MiniDAO: four committed transactions.
model::CounterExample dao_trace(const interp::Interpreter& in)
{
  model::CounterExample ce;
  ce.ctor.sender = 2;
  std::vector<Word> bal{0, 90, 60, 0, 0};
  ce.steps.push_back({std::nullopt, in.construct(ce.ctor, bal, 3)});
  std::vector<model::TxParams> txs{{"deposit", 50, 1, 4, {}},
                                   {"deposit", 20, 2, 6, {}},
                                   {"propose", 0, 2, 7, {3, 40}},
                                   {"vote", 0, 2, 9, {1, 0}}};
  for (const auto& tx : txs) {
    auto out = in.exec_tx(ce.steps.back().state, tx);
    REQUIRE(out.committed);
    ce.steps.push_back({tx, out.state});
  }
  return ce;
}

} // namespace

TEST_CASE("s-expressions")
{
  auto e = smt::parse_sexpr("(model (define-fun |x y| () (_ BitVec 8) #x0f))");
  REQUIRE_FALSE(e.atom);
  CHECK(e.list[0].text == "model");
  CHECK(e.list[1].list[1].text == "|x y|");
  CHECK(e.str() == "(model (define-fun |x y| () (_ BitVec 8) #x0f))");
  CHECK(smt::parse_sexprs("; c\n sat (a b) unsat").size() == 3);
  CHECK(smt::complete_sexpr("(a (b)) "));
  CHECK_FALSE(smt::complete_sexpr("(a (b) "));
  CHECK_THROWS_AS(smt::parse_sexpr("(a))"), smt::SExprError);
  CHECK(smt::symbol("step0_slot_1") == "step0_slot_1");
  CHECK(smt::symbol("bad name") == "|bad name|");
  CHECK(smt::symbol("1x") == "|1x|");
}

TEST_CASE("basic queries")
{
  REQUIRE(solver_available());
  auto b = make_bundle(kCounter, config(16, 2));
  for (bool incremental : {false, true}) {
    auto opt = solver_options(60);
    opt.incremental = incremental;
    smt::Context ctx(*b.model, opt);
    Term x = smt::var("x", Sort::bv(16));
    ctx.push();
    ctx.assert_term(ugt(x, mk_bv(3, 16)));
    ctx.assert_term(ult(x, mk_bv(5, 16)));
    auto r = ctx.check({x});
    REQUIRE(r.status == smt::Status::Sat);
    CHECK(r.values.at("x") == 4);
    ctx.pop();
    ctx.assert_term(ult(x, x));
    CHECK(ctx.check({}).status == smt::Status::Unsat);
    CHECK(ctx.queries() == 2);
    CHECK(ctx.script().find("(check-sat)") == std::string::npos);
  }
}

TEST_CASE("a missing solver is reported")
{
  auto b = make_bundle(kCounter, config(8, 2));
  auto opt = solver_options(5);
  opt.path = "/nonexistent/solver";
  smt::Context ctx(*b.model, opt);
  ctx.assert_term(mk_bool(true));
  CHECK_THROWS_AS(ctx.check({}), smt::SolverProcessError);
}

TEST_CASE("a timeout gives unknown")
{
  REQUIRE(solver_available());
  auto b = load_bundle("MiniDAO.sol", config(16, 3), "minidao.prop");
  checker::CheckOptions opt;
  opt.solver = solver_options(1);
  opt.kmin = 4;
  opt.kminSet = true;
  opt.kmax = 5;
  checker::Checker ck(*b.model, *b.interp, opt);
  auto r = ck.check(b.property("NotVotedRefund"));
  CHECK(r.verdict == checker::Verdict::Unknown);
  CHECK(r.detail.find("i=4") != std::string::npos);
  REQUIRE(r.queries.size() == 1);
  CHECK(r.queries[0].status == smt::Status::Unknown);
}

TEST_CASE("transition relation shape")
{
  REQUIRE(solver_available());
  auto one = make_bundle("contract C { uint x; function f() public { x = 1; } }", config(8, 2));
  CHECK(smt::Encoder(*one.model).transition_disjuncts(1).size() == 1);

  auto b = load_bundle("MiniDAO.sol", config(8, 2));
  smt::Encoder enc(*b.model);
  auto ds = enc.transition_disjuncts(1);
  CHECK(ds.size() == 5);

  smt::Context ctx(*b.model, solver_options(300));
  ctx.push();
  ctx.assert_term(not_(eq(enc.transition(1), or_(ds))));
  CHECK(ctx.check({}).status == smt::Status::Unsat);
  ctx.pop();
  // every precondition requires a live contract
  ctx.assert_term(enc.transition(1));
  ctx.assert_term(not_(enc.state(0).alive));
  CHECK(ctx.check({}).status == smt::Status::Unsat);
}

TEST_CASE("paths and side constraints")
{
  REQUIRE(solver_available());
  auto b = make_bundle(kCounter, config(8, 2));
  smt::Encoder enc(*b.model);
  CHECK(enc.path(0)->is_true());
  std::set<std::string> steps;
  for (const auto& [in, sort] : free_inputs(enc.path(2)))
    steps.insert(in.name.substr(0, 5));
  CHECK(steps.count("step0"));
  CHECK(steps.count("step1"));
  CHECK(steps.count("step2"));
  CHECK_FALSE(steps.count("step3"));

  auto query = [&](unsigned k, const Term& extra) {
    smt::Context ctx(*b.model, solver_options(60));
    ctx.assert_term(enc.path(k));
    ctx.assert_term(enc.side_constraints(k));
    ctx.assert_term(extra);
    return ctx.check({}).status;
  };
  CHECK(query(1, mk_bool(true)) == smt::Status::Sat);
  CHECK(query(1, eq(enc.tx(1).sender, mk_addr(b.model->addrs.contract()))) == smt::Status::Unsat);
  CHECK(query(1, eq(enc.tx(1).sender, mk_addr(b.model->addrs.no_addr()))) == smt::Status::Unsat);
  CHECK(query(2, ult(enc.tx(2).time, enc.tx(1).time)) == smt::Status::Unsat);
  CHECK(query(2, eq(enc.tx(2).time, enc.tx(1).time)) == smt::Status::Unsat);
  CHECK(query(1, ult(enc.tx(1).time, enc.state(0).blocktime)) == smt::Status::Unsat);
}

TEST_CASE("decoding solver paths")
{
  REQUIRE(solver_available());
  auto b = load_bundle("MiniDAO.sol", config(8, 3));
  smt::Encoder enc(*b.model);

  smt::Context c0(*b.model, solver_options(60));
  c0.assert_term(enc.initial());
  auto q0 = c0.check(enc.trace_vars(0));
  REQUIRE(q0.status == smt::Status::Sat);
  auto ce0 = enc.decode(q0.values, 0);
  CHECK(ce0.steps.size() == 1);
  CHECK_FALSE(ce0.steps[0].state.event);
  CHECK(model::format_transcript(ce0, *b.ast, b.model->addrs) == "0. NoEvent\n");

  // a solver path of length 1 is reproduced by the interpreter
  smt::Context c1(*b.model, solver_options(60));
  c1.assert_term(enc.path(1));
  c1.assert_term(enc.side_constraints(1));
  c1.assert_term(eq(enc.tx(1).fn, mk_fn(*b.model->function_index("propose"))));
  auto q1 = c1.check(enc.trace_vars(1));
  REQUIRE(q1.status == smt::Status::Sat);
  auto ce1 = enc.decode(q1.values, 1);
  REQUIRE(ce1.steps[1].tx);
  CHECK(ce1.steps[1].tx->args.size() == 2);
  CHECK(interp::replay(ce1, *b.interp).confirmed);

  // argument slots beyond the arity are not reported
  smt::Context c2(*b.model, solver_options(60));
  c2.assert_term(enc.path(1));
  c2.assert_term(enc.side_constraints(1));
  c2.assert_term(eq(enc.tx(1).fn, mk_fn(*b.model->function_index("deposit"))));
  auto q2 = c2.check(enc.trace_vars(1));
  REQUIRE(q2.status == smt::Status::Sat);
  CHECK(enc.decode(q2.values, 1).steps[1].tx->args.empty());
}

TEST_CASE("decode after encoding an interpreter trace reproduces it")
{
  REQUIRE(solver_available());
  auto b = load_bundle("MiniDAO.sol", config(8, 3));
  auto ce = dao_trace(*b.interp);
  smt::Encoder enc(*b.model);
  const auto& m = *b.model;
  unsigned k = static_cast<unsigned>(ce.length());
  smt::Context ctx(m, solver_options(120));
  ctx.assert_term(enc.path(k));
  ctx.assert_term(enc.side_constraints(k));
  auto cv = enc.ctor();
  ctx.assert_term(eq(cv.sender, mk_addr(ce.ctor.sender)));
  ctx.assert_term(eq(cv.value, mk_bv(ce.ctor.value, 8)));
  auto s0 = enc.state(0);
  for (std::size_t a = 0; a < m.addrs.size(); ++a)
    ctx.assert_term(eq(s0.balances[a], mk_bv(ce.steps[0].state.balances[a], 8)));
  ctx.assert_term(eq(s0.blocktime, mk_bv(ce.steps[0].state.blocktime, 8)));
  for (unsigned i = 1; i <= k; ++i) {
    const auto& tx = *ce.steps[i].tx;
    auto tv = enc.tx(i);
    const auto& f = *m.find_function(tx.fname);
    ctx.assert_term(eq(tv.fn, mk_fn(*m.function_index(tx.fname))));
    ctx.assert_term(eq(tv.sender, mk_addr(tx.sender)));
    ctx.assert_term(eq(tv.value, mk_bv(tx.value, 8)));
    ctx.assert_term(eq(tv.time, mk_bv(tx.time, 8)));
    for (std::size_t p = 0; p < tx.args.size(); ++p) {
      Term v = enc.arg_var(tv, f, p);
      ctx.assert_term(eq(v, mk_const(tx.args[p], v->sort)));
    }
  }
  auto q = ctx.check(enc.trace_vars(k));
  REQUIRE(q.status == smt::Status::Sat);
  auto back = enc.decode(q.values, k);
  CHECK(back.ctor == ce.ctor);
  REQUIRE(back.steps.size() == ce.steps.size());
  for (std::size_t i = 0; i < ce.steps.size(); ++i) {
    CAPTURE(i);
    CHECK(back.steps[i] == ce.steps[i]);
  }
}

TEST_CASE("query scripts are dumped")
{
  REQUIRE(solver_available());
  auto dir = std::filesystem::temp_directory_path() / "solbmc_dump_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto b = make_bundle(kCounter, config(8, 2));
  smt::Encoder enc(*b.model);
  auto opt = solver_options(60);
  opt.dumpDir = dir.string();
  smt::Context ctx(*b.model, opt, "dumped");
  ctx.assert_term(enc.path(1));
  ctx.assert_term(enc.side_constraints(1));
  CHECK(ctx.check({}).status == smt::Status::Sat);
  std::vector<std::filesystem::path> files(std::filesystem::directory_iterator(dir), {});
  REQUIRE(files.size() == 1);
  auto text = read_text(files[0].string());
  CHECK(text.find("(set-logic") != std::string::npos);
  CHECK(text.find("step1_counter") != std::string::npos);
  CHECK(text.find("(check-sat)") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("conservation holds on every fixture without selfdestruct")
{
  REQUIRE(solver_available());
  for (const char* f : {"fixtures/Counter.sol", "fixtures/Divider.sol", "fixtures/Bank.sol", "fixtures/Phases.sol",
                        "fixtures/Helpers.sol"}) {
    CAPTURE(f);
    auto b = load_bundle(f, config(8, 2));
    smt::Encoder enc(*b.model);
    smt::Context ctx(*b.model, solver_options(300));
    ctx.assert_term(enc.conservation_violation());
    CHECK(ctx.check({}).status == smt::Status::Unsat);
  }
  // the pre-state bound matters: a payable call can wrap an unbounded balance
  auto b = load_bundle("fixtures/Bank.sol", config(8, 2));
  smt::Encoder enc(*b.model);
  smt::Context ctx(*b.model, solver_options(60));
  ctx.assert_term(enc.transition(1));
  ctx.assert_term(not_(enc.conserved(1)));
  CHECK(ctx.check({}).status == smt::Status::Sat);
}
