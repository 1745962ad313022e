#include "doctest.h"
#include "harness.hpp"

#include <cstdlib>
#include <fstream>
#include <random>

using namespace solbmc;
using namespace solbmc::testing;

TEST_CASE("address domain")
{
  auto d3 = model::build_addr_domain(config(16, 3));
  CHECK(d3.names() == std::vector<std::string>{"noAddr", "addr1", "addr2", "addr3", "contractAddr"});
  CHECK(d3.size() == 5);
  CHECK(d3.contract() == 4);
  CHECK(d3.find("addr2") == 2u);
  CHECK_FALSE(d3.find("addr4"));
  CHECK(model::build_addr_domain(config(16, 1)).size() == 3);
  CHECK_THROWS_AS(config(16, 0).validate(), model::ConfigError);
  CHECK_THROWS_AS(config(0, 2).validate(), model::ConfigError);
  CHECK_THROWS_AS(config(257, 2).validate(), model::ConfigError);
  CHECK_NOTHROW(config(256, 2).validate());
}

TEST_CASE("slot flattening")
{
  auto count = [](const std::string& vars, unsigned users) {
    auto ast = parse_contract("contract C { " + vars + " }");
    return model::SlotLayout(ast, model::build_addr_domain(config(8, users))).size();
  };
  CHECK(count("uint x; mapping(address => uint) m;", 3) == 6);
  CHECK(count("", 3) == 0);
  CHECK(count("bool a; uint[3] arr;", 3) == 4);
  CHECK(count("uint constant c = 4; uint x;", 3) == 1);
  CHECK(count("mapping(address => bool)[2] v;", 1) == 6);

  auto ast = load_contract("MiniDAO.sol");
  model::SlotLayout l(ast, model::build_addr_domain(config(16, 3)));
  REQUIRE(l.find("isVoted[0][addr2]"));
  CHECK(l[*l.find("isVoted[0][addr2]")].path == std::vector<unsigned>{0, 2});
  CHECK(l[*l.find("isVoted[0][addr2]")].sort == model::ScalarSort::Bool);
  CHECK(l[*l.find("proposalState")].sort == model::ScalarSort::Enum);
  CHECK(l[*l.find("proposalState")].enumSize == 3);
  auto [first, n] = l.range_of("daoBalance");
  CHECK(n == 5);
  CHECK(l[first].name == "daoBalance[noAddr]");
}

TEST_CASE("values render and parse back")
{
  auto addrs = model::build_addr_domain(config(16, 3));
  for (auto sort : {model::ScalarSort::Bool, model::ScalarSort::Uint, model::ScalarSort::Addr, model::ScalarSort::Enum}) {
    for (unsigned v : {0u, 1u, 3u}) {
      if (sort == model::ScalarSort::Bool && v > 1)
        continue;
      auto text = model::format_value(v, sort, addrs);
      CHECK(model::parse_value(text, sort, addrs) == v);
    }
  }
  CHECK(model::format_value(4, model::ScalarSort::Addr, addrs) == "contractAddr");
  CHECK(model::format_value(1, model::ScalarSort::Bool, addrs) == "true");
  CHECK_THROWS(model::parse_value("addr9", model::ScalarSort::Addr, addrs));
}

TEST_CASE("trace JSON round-trips")
{
  auto b = load_bundle("MiniDAO.sol", config(16, 3));
  const auto& in = *b.interp;
  model::CounterExample ce;
  ce.ctor.sender = 1;
  std::vector<Word> bal{0, 500, 300, 0, 0};
  ce.steps.push_back({std::nullopt, in.construct(ce.ctor, bal, 10)});
  std::vector<model::TxParams> txs{{"deposit", 200, 1, 11, {}},
                                   {"deposit", 100, 2, 12, {}},
                                   {"propose", 0, 2, 13, {3, 250}},
                                   {"vote", 0, 1, 14, {1, 1}}};
  for (const auto& tx : txs) {
    auto out = in.exec_tx(ce.steps.back().state, tx);
    REQUIRE(out.committed);
    ce.steps.push_back({tx, out.state});
  }
  ce.witness = model::Witness{1, 2, 4};
  ce.probe = model::TxParams{"refund", 0, 2, 20, {}};
  ce.focus = "step = 2, inv = addr2";
  auto j = model::trace_to_json(ce, *b.ast, in.layout(), in.addrs());
  auto back = model::trace_from_json(j, *b.ast, in.layout(), in.addrs());
  CHECK(back == ce);
  CHECK(model::trace_from_json(nlohmann::json::parse(j.dump()), *b.ast, in.layout(), in.addrs()) == ce);

  auto transcript = model::format_transcript(ce, *b.ast, in.addrs());
  CHECK(transcript.find("0. NoEvent") != std::string::npos);
  CHECK(transcript.find("1. Deposited(addr1, 200)") != std::string::npos);
  CHECK(transcript.find("4. Voted(addr1, 1, true)") != std::string::npos);

  ce.fromInitial = false;
  CHECK(model::trace_from_json(model::trace_to_json(ce, *b.ast, in.layout(), in.addrs()), *b.ast, in.layout(),
                               in.addrs()) == ce);

  auto bad = j;
  bad["steps"][1]["tx"]["sender"] = "addr7";
  CHECK_THROWS_AS(model::trace_from_json(bad, *b.ast, in.layout(), in.addrs()), model::TraceFormatError);
}

TEST_CASE("MiniDAO constructor matches the golden slot map")
{
  auto b = load_bundle("MiniDAO.sol", config(16, 3));
  const auto& in = *b.interp;
  model::CtorInputs ci;
  ci.sender = 1;
  auto s = in.construct(ci, std::vector<Word>(in.addrs().size(), 0), 0);
  nlohmann::json slots = nlohmann::json::object();
  for (std::size_t i = 0; i < in.layout().size(); ++i)
    slots[in.layout()[i].name] = model::format_value(s.vars[i], in.layout()[i].sort, in.addrs());
  std::string path = corpus_path("golden/MiniDAO.ctor.json");
  if (std::getenv("SOLBMC_UPDATE_GOLDEN")) {
    std::ofstream(path) << nlohmann::json{{"intWidth", 16}, {"addrs", 3}, {"slots", slots}}.dump(2) << "\n";
  }
  auto golden = nlohmann::json::parse(read_text(path));
  CHECK(golden["slots"] == slots);

  // the symbolic initial values agree with the interpreter
  term::Evaluator ev([&](const term::Input& i, const term::Sort&) -> Word {
    switch (i.kind) {
    case term::InputKind::Sender:
      return ci.sender;
    default:
      return 0;
    }
  });
  for (std::size_t i = 0; i < in.layout().size(); ++i)
    CHECK(ev(b.model->init.varInit[i]) == s.vars[i]);
}

TEST_CASE("state ordering is a strict weak order")
{
  std::mt19937 rng(3);
  std::vector<model::SystemState> v;
  for (int i = 0; i < 60; ++i) {
    model::SystemState s;
    s.vars = {rng() % 3, rng() % 2};
    s.alive = rng() % 2;
    s.balances = {rng() % 2};
    s.blocktime = rng() % 2;
    v.push_back(s);
  }
  for (const auto& a : v) {
    CHECK_FALSE(a < a);
    for (const auto& b : v) {
      CHECK((a == b) == (!(a < b) && !(b < a)));
    }
  }
}
