#include "doctest.h"
#include "harness.hpp"

#include <filesystem>
#include <random>
#include <regex>

using namespace solbmc;
using namespace solbmc::testing;

namespace {

std::vector<Diagnostic> of_kind(const std::vector<Diagnostic>& ds, DiagKind k)
{
  std::vector<Diagnostic> out;
  for (const auto& d : ds) {
    if (d.kind == k)
      out.push_back(d);
  }
  return out;
}

std::vector<std::string> corpus_files(const std::string& dir)
{
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_path(dir))) {
    if (e.path().extension() == ".sol")
      out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("MiniDAO parses with its five public functions and six events")
{
  auto ast = load_contract("MiniDAO.sol");
  CHECK(ast.name == "MiniDAO");
  std::vector<std::string> names;
  for (const auto* f : ast.public_functions())
    names.push_back(f->name);
  std::sort(names.begin(), names.end());
  CHECK(names == std::vector<std::string>{"deposit", "execute_proposal", "propose", "refund", "vote"});
  CHECK(ast.events.size() == 6);
  CHECK(ast.find_function("deposit")->payable);
}

TEST_CASE("empty contract")
{
  auto r = frontend::parse("contract C { }");
  REQUIRE(r.ast);
  CHECK(r.diagnostics.empty());
  CHECK(r.ast->functions.empty());
  CHECK(r.ast->events.empty());
}

TEST_CASE("a while loop is a rule 1 violation at the loop")
{
  std::string src = "contract C {\n  function f() public {\n    while (true) {}\n  }\n}\n";
  auto r = frontend::parse(src);
  auto v = of_kind(r.diagnostics, DiagKind::SubsetViolation);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == 1);
  CHECK(v[0].span.line == 3);
  CHECK(v[0].span.col == 5);
  CHECK(src.substr(v[0].span.begin, 5) == "while");
}

TEST_CASE("MiniDAO is in the subset")
{
  for (const char* f : {"MiniDAO.sol", "MiniDAO_buggy.sol"}) {
    auto r = frontend::parse(read_text(corpus_path(f)));
    REQUIRE(r.ast);
    CHECK(frontend::validate_subset(*r.ast).empty());
    CHECK(frontend::validate_constructor(*r.ast).empty());
    CHECK(r.diagnostics.empty());
  }
}

TEST_CASE("two events with five parameters give two rule 6 violations")
{
  auto r = frontend::parse(R"(contract C {
    event A(uint a, uint b, uint c, uint d, uint e);
    event B(uint a, uint b, uint c, uint d, bool e);
    function f() public { emit A(1, 2, 3, 4, 5); emit B(1, 2, 3, 4, true); }
  })");
  REQUIRE(r.ast);
  auto v = frontend::validate_subset(*r.ast);
  REQUIRE(v.size() == 2);
  CHECK(v[0].rule == 6);
  CHECK(v[1].rule == 6);
}

TEST_CASE("mutual recursion is one rule 1 violation")
{
  auto r = frontend::parse(R"(contract C {
    uint x;
    function f(uint a) internal returns (uint) { return g(a); }
    function g(uint a) internal returns (uint) { return f(a); }
    function run() public { x = f(1); }
  })");
  REQUIRE(r.ast);
  auto v = frontend::validate_subset(*r.ast);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == 1);
}

TEST_CASE("constructor restrictions")
{
  auto ctor = [](const std::string& body) {
    auto r = frontend::parse("contract C { address owner; uint x; constructor() public { " + body + " } }");
    REQUIRE(r.ast);
    return frontend::validate_constructor(*r.ast);
  };
  CHECK(ctor("owner = msg.sender;").empty());
  CHECK(ctor("require(x > 0);").size() == 1);
  CHECK(ctor("msg.sender.transfer(1);").size() == 1);
  CHECK(ctor("selfdestruct(msg.sender);").size() == 1);
  CHECK(ctor("x = 10 / x;").size() == 1);
}

TEST_CASE("syntax errors are diagnostics")
{
  auto r = frontend::parse("contract C { function f( public {} }");
  CHECK_FALSE(r.ast);
  REQUIRE_FALSE(r.diagnostics.empty());
  CHECK(r.diagnostics[0].kind == DiagKind::SyntaxError);
}

TEST_CASE("unknown identifiers are type errors")
{
  auto r = frontend::parse("contract C { uint x; function f() public { x = y; } }");
  REQUIRE_FALSE(r.diagnostics.empty());
  CHECK(r.diagnostics[0].kind == DiagKind::TypeError);
}

TEST_CASE("diagnostics serialize to rule/message/line/col records")
{
  auto r = frontend::parse("contract C { function f() public { while (true) {} } }");
  auto j = diagnostics_to_json(r.diagnostics);
  REQUIRE(j.size() == 1);
  CHECK(j[0]["rule"] == 1);
  CHECK(j[0]["line"] == 1);
  CHECK(j[0].contains("message"));
  CHECK(j[0].contains("col"));
}

TEST_CASE("every non-Sol snippet cites the rule named in its header")
{
  auto files = corpus_files("nonsol");
  CHECK(files.size() >= 10);
  std::regex expect(R"(// expect: rule (\d))");
  for (const auto& f : files) {
    CAPTURE(f);
    std::string src = read_text(f);
    std::smatch mt;
    REQUIRE(std::regex_search(src, mt, expect));
    int rule = std::stoi(mt[1]);
    auto r = frontend::parse(src);
    REQUIRE(r.ast);
    auto v = of_kind(r.diagnostics, DiagKind::SubsetViolation);
    bool cited = false;
    for (const auto& d : v) {
      cited = cited || d.rule == rule;
      CHECK(d.rule >= 1);
      CHECK(d.rule <= 9);
      CHECK(d.span.begin < src.size());
      CHECK(d.span.end <= src.size());
    }
    CHECK(cited);
  }
}

TEST_CASE("pretty-printing round-trips")
{
  std::vector<std::string> files = corpus_files("fixtures");
  files.push_back(corpus_path("MiniDAO.sol"));
  files.push_back(corpus_path("MiniDAO_buggy.sol"));
  files.push_back(corpus_path("empty.sol"));
  for (const auto& f : files) {
    CAPTURE(f);
    auto a = frontend::parse(read_text(f));
    REQUIRE(a.ast);
    std::string printed = frontend::print_contract(*a.ast);
    auto b = frontend::parse(printed);
    REQUIRE(b.ast);
    CHECK(frontend::equal_ast(*a.ast, *b.ast));
    CHECK(frontend::print_contract(*b.ast) == printed);
  }
}

TEST_CASE("parse is total on mutated sources")
{
  std::string base = read_text(corpus_path("MiniDAO.sol"));
  const std::string alphabet = "(){};=+-*/<>!&|[]., \nabcxyz019\"'";
  std::mt19937 rng(7);
  for (int n = 0; n < 1500; ++n) {
    std::string s = base;
    int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits; ++e) {
      std::size_t pos = rng() % s.size();
      switch (rng() % 3) {
      case 0:
        s.erase(pos, 1 + rng() % 8);
        break;
      case 1:
        s.insert(pos, 1, alphabet[rng() % alphabet.size()]);
        break;
      default:
        s[pos] = alphabet[rng() % alphabet.size()];
      }
    }
    auto r = frontend::parse(s);
    CHECK((r.ast.has_value() || !r.diagnostics.empty()));
    for (const auto& d : r.diagnostics) {
      CHECK(d.span.begin <= s.size());
      if (d.kind == DiagKind::SubsetViolation) {
        CHECK(d.rule >= 1);
        CHECK(d.rule <= 9);
      }
    }
  }
}
