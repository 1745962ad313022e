#include "solbmc/checker.hpp"
#include "solbmc/frontend.hpp"
#include "solbmc/interp.hpp"
#include "solbmc/speclang.hpp"
#include "solbmc/symexec.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace solbmc;
using nlohmann::json;

namespace {

enum Exit { Ok = 0, Violation = 1, Unknown = 2, InputError = 3 };

struct InputFailure {
  std::string message;
};

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputFailure{"cannot read '" + path + "'"};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputFailure{"cannot write '" + path + "'"};
  out << text;
}

struct ModelFlags {
  unsigned addrs = 3;
  unsigned width = 16;
  unsigned k = 12;
  unsigned minK = 0;

  model::ModelConfig config() const
  {
    model::ModelConfig cfg;
    cfg.addrCount = addrs;
    cfg.intWidth = width;
    cfg.maxTrace = k;
    cfg.minTrace = minK;
    return cfg;
  }
};

void add_model_flags(CLI::App* cmd, ModelFlags& f)
{
  cmd->add_option("--addrs", f.addrs, "number of user addresses")->capture_default_str();
  cmd->add_option("--int-width", f.width, "integer width W in bits")->capture_default_str();
}

/// Parses a contract, printing diagnostics. Throws InputFailure unless the
/// contract is in the subset.
frontend::ContractAst load_contract(const std::string& path)
{
  std::string src = read_file(path);
  auto r = frontend::parse(src);
  for (const auto& d : r.diagnostics)
    std::cerr << format_diagnostic(d, path) << "\n";
  if (!r.ast)
    throw InputFailure{path + ": syntax errors"};
  if (has_errors(r.diagnostics))
    throw InputFailure{path + ": the contract is outside the supported subset"};
  return std::move(*r.ast);
}

// ---------------------------------------------------------------------------

struct CheckFlags {
  std::string contract, spec;
  ModelFlags model;
  bool kSet = false;
  std::string solver;
  std::vector<std::string> solverArgs;
  double timeout = 600;
  bool json = false;
  std::string dumpSmt, dumpModel, ceDir;
  bool incremental = false;
  bool lemmas = false;
  bool verbose = false;
  std::vector<std::string> properties;
};

int run_check(const CheckFlags& f)
{
  auto cfg = f.model.config();
  cfg.validate();
  frontend::ContractAst ast = load_contract(f.contract);
  auto m = symexec::build_model(ast, cfg);
  if (!f.dumpModel.empty())
    write_file(f.dumpModel, symexec::dump_model(m));

  auto sp = spec::parse_spec(read_file(f.spec), ast, cfg);
  for (const auto& d : sp.diagnostics)
    std::cerr << format_diagnostic(d, f.spec) << "\n";
  if (!sp.ok())
    throw InputFailure{f.spec + ": invalid specification"};
  for (const auto& name : f.properties) {
    bool known = false;
    for (const auto& p : sp.properties)
      known = known || p.name == name;
    if (!known)
      throw InputFailure{"no property named '" + name + "'"};
  }

  checker::CheckOptions opt;
  opt.solver.path = smt::resolve_solver_path(f.solver);
  if (::access(opt.solver.path.c_str(), X_OK) != 0)
    throw InputFailure{"solver '" + opt.solver.path + "' not found (set --solver or SOLBMC_SOLVER)"};
  opt.solver.args = f.solverArgs;
  opt.solver.timeoutSeconds = f.timeout;
  opt.solver.dumpDir = f.dumpSmt;
  opt.solver.incremental = f.incremental;
  if (!f.dumpSmt.empty())
    std::filesystem::create_directories(f.dumpSmt);
  if (!f.ceDir.empty())
    std::filesystem::create_directories(f.ceDir);
  opt.kmax = f.model.k;
  opt.kmaxSet = f.kSet;
  opt.kmin = f.model.minK;
  opt.kminSet = f.model.minK != 0;
  opt.lemmas = f.lemmas;
  if (f.verbose) {
    opt.onQuery = [](const std::string& prop, const checker::QueryStat& q) {
      std::cerr << prop << " " << q.label << ": " << smt::status_name(q.status) << " (" << q.seconds << " s)\n";
    };
  }

  interp::Interpreter in(ast, cfg);
  checker::Checker ck(m, in, opt);
  json results = json::array();
  bool violated = false, unknown = false;
  for (const auto& p : sp.properties) {
    if (!f.properties.empty() && std::find(f.properties.begin(), f.properties.end(), p.name) == f.properties.end())
      continue;
    auto r = ck.check(p);
    violated = violated || r.verdict == checker::Verdict::Violated;
    unknown = unknown || r.verdict == checker::Verdict::Unknown;
    if (f.json)
      results.push_back(checker::result_to_json(r, m));
    else
      std::cout << checker::format_result(r, m) << std::endl;
    if (r.ce && !f.ceDir.empty()) {
      json ce{{"config", {{"addrs", cfg.addrCount}, {"intWidth", cfg.intWidth}}},
              {"property", r.property},
              {"counterexample", model::trace_to_json(*r.ce, ast, m.layout, m.addrs)}};
      write_file((std::filesystem::path(f.ceDir) / (r.property + ".json")).string(), ce.dump(2) + "\n");
    }
  }
  if (f.json) {
    json out{{"contract", ast.name},
             {"config", {{"addrs", cfg.addrCount}, {"intWidth", cfg.intWidth}, {"k", f.model.k}, {"minK", f.model.minK}}},
             {"results", results}};
    std::cout << out.dump(2) << std::endl;
  }
  return violated ? Violation : unknown ? Unknown : Ok;
}

// ---------------------------------------------------------------------------

int run_validate(const std::string& path, bool asJson)
{
  std::string src = read_file(path);
  auto r = frontend::parse(src);
  if (asJson) {
    json out{{"file", path}, {"inSubset", r.ast && !has_errors(r.diagnostics)},
             {"diagnostics", diagnostics_to_json(r.diagnostics)}};
    std::cout << out.dump(2) << std::endl;
  } else {
    for (const auto& d : r.diagnostics)
      std::cout << format_diagnostic(d, path) << "\n";
  }
  if (!r.ast)
    return InputError;
  if (has_errors(r.diagnostics))
    return Violation;
  if (!asJson)
    std::cout << path << ": " << r.ast->name << " is in the supported subset\n";
  return Ok;
}

// ---------------------------------------------------------------------------

int run_replay(const std::string& contract, const std::string& cePath, ModelFlags flags, bool addrsSet, bool widthSet,
               const std::string& property)
{
  json j;
  try {
    j = json::parse(read_file(cePath));
  } catch (const json::parse_error& e) {
    throw InputFailure{cePath + ": " + e.what()};
  }
  // accepted shapes: a bare counter-example, {config, counterexample}, or
  // the output of `check --json`
  if (j.contains("results")) {
    json pick;
    for (const auto& r : j.at("results")) {
      if (r.contains("counterexample") && (property.empty() || r.value("property", "") == property)) {
        pick = json{{"config", j.value("config", json::object())}, {"counterexample", r.at("counterexample")}};
        break;
      }
    }
    if (pick.is_null())
      throw InputFailure{cePath + ": no counter-example" + (property.empty() ? "" : " for " + property)};
    j = pick;
  }
  json ceJson = j.contains("counterexample") ? j.at("counterexample") : j;
  if (j.contains("config")) {
    const auto& c = j.at("config");
    if (!addrsSet && c.contains("addrs"))
      flags.addrs = c.at("addrs").get<unsigned>();
    if (!widthSet && c.contains("intWidth"))
      flags.width = c.at("intWidth").get<unsigned>();
  }
  auto cfg = flags.config();
  cfg.validate();
  frontend::ContractAst ast = load_contract(contract);
  interp::Interpreter in(ast, cfg);
  model::CounterExample ce;
  try {
    ce = model::trace_from_json(ceJson, ast, in.layout(), in.addrs());
  } catch (const model::TraceFormatError& e) {
    throw InputFailure{cePath + ": " + e.what()};
  }
  auto rep = interp::replay(ce, in);
  std::cout << model::format_transcript(ce, ast, in.addrs()) << "\n" << rep.str();
  return rep.confirmed ? Ok : Violation;
}

// ---------------------------------------------------------------------------

int run_fuzz(const std::string& contract, const std::string& specPath, const ModelFlags& flags,
             const interp::FuzzOptions& fo, bool asJson)
{
  auto cfg = flags.config();
  cfg.validate();
  frontend::ContractAst ast = load_contract(contract);
  interp::Interpreter in(ast, cfg);
  std::vector<spec::Property> invariants;
  if (!specPath.empty()) {
    auto sp = spec::parse_spec(read_file(specPath), ast, cfg);
    for (const auto& d : sp.diagnostics)
      std::cerr << format_diagnostic(d, specPath) << "\n";
    if (!sp.ok())
      throw InputFailure{specPath + ": invalid specification"};
    for (auto& p : sp.properties) {
      if (p.kind == spec::PropKind::Invariant)
        invariants.push_back(std::move(p));
    }
  }
  spec::EvalEnv env;
  env.ast = &ast;
  env.layout = &in.layout();
  env.addrs = &in.addrs();
  env.width = cfg.intWidth;
  auto rep = interp::fuzz(in, fo, [&](const model::SystemState& s) -> std::string {
    for (const auto& p : invariants) {
      if (!spec::holds(*p.pred, s, env))
        return "invariant " + p.name + " fails";
    }
    return {};
  });
  if (asJson) {
    json out{{"seed", rep.seed}, {"committed", rep.committed}, {"reverted", rep.reverted}, {"failures", rep.failures}};
    std::cout << out.dump(2) << std::endl;
  } else {
    std::cout << "seed " << rep.seed << ": " << fo.runs << " runs, " << rep.committed << " committed, " << rep.reverted
              << " reverted, " << rep.failures.size() << " failures\n";
    for (const auto& f : rep.failures)
      std::cout << "  " << f << "\n";
  }
  return rep.failures.empty() ? Ok : Violation;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Bounded model checker for Solidity contracts"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML/INI file");

  CheckFlags cf;
  auto* check = app.add_subcommand("check", "check the properties of a specification file");
  check->add_option("contract", cf.contract, "contract source")->required();
  check->add_option("spec", cf.spec, "specification file")->required();
  add_model_flags(check, cf.model);
  auto* kOpt = check->add_option("--k", cf.model.k, "maximum trace length")->capture_default_str();
  check->add_option("--min-k", cf.model.minK, "first trace length to query");
  check->add_option("--solver", cf.solver, "solver binary (default: $SOLBMC_SOLVER, then z3)");
  check->add_option("--solver-arg", cf.solverArgs, "extra solver argument (repeatable)")
      ->allow_extra_args(false);
  check->add_option("--timeout", cf.timeout, "seconds per solver query")->capture_default_str();
  check->add_flag("--json", cf.json, "machine-readable output");
  check->add_option("--dump-smt", cf.dumpSmt, "write every query script to this directory");
  check->add_option("--dump-model", cf.dumpModel, "write the extracted model to this file ('-' for stdout)");
  check->add_option("--ce-dir", cf.ceDir, "write each counter-example to <dir>/<property>.json");
  check->add_flag("--incremental", cf.incremental, "keep one solver process per property");
  check->add_flag("--lemmas", cf.lemmas, "assert balance conservation at every step once proven");
  check->add_option("--property", cf.properties, "check only this property (repeatable)")->allow_extra_args(false);
  check->add_flag("-v,--verbose", cf.verbose, "report every solver query on stderr");

  std::string validatePath;
  bool validateJson = false;
  auto* validate = app.add_subcommand("validate", "check that a contract is in the supported subset");
  validate->add_option("contract", validatePath, "contract source")->required();
  validate->add_flag("--json", validateJson, "machine-readable output");

  std::string replayContract, replayCe, replayProperty;
  ModelFlags replayFlags;
  auto* replay = app.add_subcommand("replay", "replay a counter-example through the interpreter");
  replay->add_option("contract", replayContract, "contract source")->required();
  replay->add_option("counterexample", replayCe, "counter-example JSON")->required();
  add_model_flags(replay, replayFlags);
  replay->add_option("--property", replayProperty, "pick this property's counter-example from check output");

  std::string fuzzContract, fuzzSpec;
  ModelFlags fuzzFlags;
  interp::FuzzOptions fuzzOpt;
  bool fuzzJson = false;
  auto* fuzzCmd = app.add_subcommand("fuzz", "random interpreter runs checking invariants and conservation");
  fuzzCmd->add_option("contract", fuzzContract, "contract source")->required();
  fuzzCmd->add_option("--spec", fuzzSpec, "specification whose invariants are checked after every step");
  add_model_flags(fuzzCmd, fuzzFlags);
  fuzzCmd->add_option("--seed", fuzzOpt.seed, "random seed")->capture_default_str();
  fuzzCmd->add_option("--runs", fuzzOpt.runs, "number of runs")->capture_default_str();
  fuzzCmd->add_option("--length", fuzzOpt.length, "transactions per run")->capture_default_str();
  fuzzCmd->add_flag("--json", fuzzJson, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? Ok : InputError;
  }

  try {
    if (check->parsed()) {
      cf.kSet = kOpt->count() > 0;
      return run_check(cf);
    }
    if (validate->parsed())
      return run_validate(validatePath, validateJson);
    if (replay->parsed())
      return run_replay(replayContract, replayCe, replayFlags, replay->get_option("--addrs")->count() > 0,
                        replay->get_option("--int-width")->count() > 0, replayProperty);
    if (fuzzCmd->parsed())
      return run_fuzz(fuzzContract, fuzzSpec, fuzzFlags, fuzzOpt, fuzzJson);
  } catch (const InputFailure& e) {
    std::cerr << "error: " << e.message << "\n";
    return InputError;
  } catch (const model::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return InputError;
  } catch (const ModelError& e) {
    std::cerr << "error: cannot build the model: " << e.what() << "\n";
    return InputError;
  } catch (const smt::SolverProcessError& e) {
    std::cerr << "error: solver: " << e.what() << "\n";
    return Unknown;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return InputError;
  }
  return InputError;
}
