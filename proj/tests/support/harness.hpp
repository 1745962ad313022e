#pragma once

#include "solbmc/checker.hpp"
#include "solbmc/frontend.hpp"
#include "solbmc/interp.hpp"
#include "solbmc/smt.hpp"
#include "solbmc/speclang.hpp"
#include "solbmc/symexec.hpp"

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace solbmc::testing {

std::string corpus_path(const std::string& rel);
std::string read_text(const std::string& path);

/// Parses a contract that must be in the subset; throws std::runtime_error
/// with the diagnostics otherwise.
frontend::ContractAst parse_contract(const std::string& source);
frontend::ContractAst load_contract(const std::string& corpusRel);

model::ModelConfig config(unsigned width, unsigned addrs, unsigned k = 12);

/// z3 (or $SOLBMC_SOLVER) with a per-query timeout.
smt::SolverOptions solver_options(double timeoutSeconds = 600);
bool solver_available();

/// Owns everything a check needs; the AST must not move once models exist.
struct Bundle {
  std::unique_ptr<frontend::ContractAst> ast;
  model::ModelConfig cfg;
  std::unique_ptr<symexec::ContractModel> model;
  std::unique_ptr<interp::Interpreter> interp;
  std::vector<spec::Property> properties;

  const spec::Property& property(const std::string& name) const;
};

Bundle make_bundle(const std::string& source, const model::ModelConfig& cfg, const std::string& specText = {});
Bundle load_bundle(const std::string& contractRel, const model::ModelConfig& cfg, const std::string& specRel = {});

// ---------------------------------------------------------------------------
// Precondition/update differential

struct DiffStats {
  std::uint64_t cases = 0;
  std::uint64_t committed = 0;
  std::uint64_t reverted = 0;
  std::uint64_t preMismatch = 0;   // exec_tx reverts xor pre is false
  std::uint64_t postMismatch = 0;  // committed but the symbolic update differs
  std::vector<std::string> examples; // first few mismatches
};

/// Compares exec_tx with f_pre and the symbolic update of every public
/// function. Sender and address arguments range over the whole domain and
/// are substituted first; every remaining input that occurs in the
/// resulting terms is then enumerated over its full domain, except inputs
/// that only occur as a bare copy in a post term. Inputs outside
/// that support are held at each of the `fills` background states (0: all
/// zero, then pseudo-random valid values). Throws when one (function,
/// sender, address arguments) combination exceeds `limit` cases.
DiffStats differential(const Bundle& b, unsigned fills = 2, std::uint64_t limit = std::uint64_t(1) << 24);

/// Random (state, call) samples over the full domains; for contracts whose
/// exhaustive product is too large.
DiffStats differential_sampled(const Bundle& b, std::uint64_t samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reachability through the solver

/// States at the end of a path of length exactly `len` from the initial
/// state with the given balances and blocktime, enumerated with blocking
/// clauses.
std::set<model::SystemState> smt_states_at(const Bundle& b, const std::vector<Word>& balances, const Word& blocktime,
                                           unsigned len, unsigned maxStates = 100000);

/// Union over lengths 0..k.
std::set<model::SystemState> smt_reachable(const Bundle& b, const std::vector<Word>& balances, const Word& blocktime,
                                           unsigned k);

} // namespace solbmc::testing
