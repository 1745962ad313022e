#include "harness.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace solbmc::testing {

using term::Input;
using term::InputKind;
using term::Term;

std::string corpus_path(const std::string& rel) { return std::string(SOLBMC_CORPUS_DIR) + "/" + rel; }

std::string read_text(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

frontend::ContractAst parse_contract(const std::string& source)
{
  auto r = frontend::parse(source);
  if (!r.ast || has_errors(r.diagnostics)) {
    std::string msg = "contract rejected:";
    for (const auto& d : r.diagnostics)
      msg += "\n" + format_diagnostic(d, "<input>");
    throw std::runtime_error(msg);
  }
  return std::move(*r.ast);
}

frontend::ContractAst load_contract(const std::string& corpusRel) { return parse_contract(read_text(corpus_path(corpusRel))); }

model::ModelConfig config(unsigned width, unsigned addrs, unsigned k)
{
  model::ModelConfig c;
  c.intWidth = width;
  c.addrCount = addrs;
  c.maxTrace = k;
  return c;
}

smt::SolverOptions solver_options(double timeoutSeconds)
{
  smt::SolverOptions o;
  o.path = smt::resolve_solver_path("");
  o.timeoutSeconds = timeoutSeconds;
  return o;
}

bool solver_available()
{
  std::string p = smt::resolve_solver_path("");
  return !p.empty() && ::access(p.c_str(), X_OK) == 0;
}

const spec::Property& Bundle::property(const std::string& name) const
{
  for (const auto& p : properties) {
    if (p.name == name)
      return p;
  }
  throw std::runtime_error("no property " + name);
}

Bundle make_bundle(const std::string& source, const model::ModelConfig& cfg, const std::string& specText)
{
  Bundle b;
  b.ast = std::make_unique<frontend::ContractAst>(parse_contract(source));
  b.cfg = cfg;
  b.model = std::make_unique<symexec::ContractModel>(symexec::build_model(*b.ast, cfg));
  b.interp = std::make_unique<interp::Interpreter>(*b.ast, cfg);
  if (!specText.empty()) {
    auto sp = spec::parse_spec(specText, *b.ast, cfg);
    if (!sp.ok()) {
      std::string msg = "spec rejected:";
      for (const auto& d : sp.diagnostics)
        msg += "\n" + format_diagnostic(d, "<spec>");
      throw std::runtime_error(msg);
    }
    b.properties = std::move(sp.properties);
  }
  return b;
}

Bundle load_bundle(const std::string& contractRel, const model::ModelConfig& cfg, const std::string& specRel)
{
  return make_bundle(read_text(corpus_path(contractRel)), cfg, specRel.empty() ? "" : read_text(corpus_path(specRel)));
}

// ---------------------------------------------------------------------------

namespace {

struct InputKey {
  InputKind kind;
  unsigned index;
  bool operator<(const InputKey& o) const { return std::tie(kind, index) < std::tie(o.kind, o.index); }
  bool operator==(const InputKey& o) const = default;
};

std::vector<Word> range(unsigned n)
{
  std::vector<Word> v;
  for (unsigned i = 0; i < n; ++i)
    v.push_back(i);
  return v;
}

std::vector<Word> slot_domain(const model::Slot& s, unsigned width, std::size_t addrs)
{
  switch (s.sort) {
  case model::ScalarSort::Bool:
    return range(2);
  case model::ScalarSort::Addr:
    return range(static_cast<unsigned>(addrs));
  case model::ScalarSort::Enum:
    return range(s.enumSize);
  default:
    return range(1u << width);
  }
}

class DiffRunner {
public:
  DiffRunner(const Bundle& b, DiffStats& st) : b_(b), m_(*b.model), st_(st), width_(m_.width()) {}

  std::optional<model::EventInstance> event_of(unsigned tag) const
  {
    if (tag == 0)
      return std::nullopt;
    model::EventInstance e;
    e.tag = m_.events.name_of(tag);
    e.args.assign(m_.events.events.at(tag - 1)->params.size(), 0);
    return e;
  }

  unsigned tag_of(const std::optional<model::EventInstance>& e) const
  {
    if (!e)
      return 0;
    return *m_.events.tag_of(e->tag);
  }

  Word read(const Input& in, const model::SystemState& s, const model::TxParams& tx) const
  {
    switch (in.kind) {
    case InputKind::Slot:
      return s.vars.at(in.index);
    case InputKind::Alive:
      return s.alive ? 1 : 0;
    case InputKind::EventTag:
      return tag_of(s.event);
    case InputKind::EventArg:
      return s.event && in.index < s.event->args.size() ? s.event->args[in.index] : Word(0);
    case InputKind::Balance:
      return s.balances.at(in.index);
    case InputKind::Blocktime:
      return s.blocktime;
    case InputKind::Value:
      return tx.value;
    case InputKind::Sender:
      return tx.sender;
    case InputKind::Time:
      return tx.time;
    case InputKind::Arg:
      return tx.args.at(in.index);
    default:
      throw std::logic_error("unexpected input in a transition term");
    }
  }

  void write(const InputKey& k, const Word& v, model::SystemState& s, model::TxParams& tx) const
  {
    switch (k.kind) {
    case InputKind::Slot:
      s.vars.at(k.index) = v;
      break;
    case InputKind::Alive:
      s.alive = v != 0;
      break;
    case InputKind::EventTag:
      s.event = event_of(static_cast<unsigned>(v));
      break;
    case InputKind::EventArg:
      if (s.event && k.index < s.event->args.size())
        s.event->args[k.index] = v;
      break;
    case InputKind::Balance:
      s.balances.at(k.index) = v;
      break;
    case InputKind::Blocktime:
      s.blocktime = v;
      break;
    case InputKind::Value:
      tx.value = v;
      break;
    case InputKind::Time:
      tx.time = v;
      break;
    case InputKind::Arg:
      tx.args.at(k.index) = v;
      break;
    default:
      throw std::logic_error("unexpected input in a transition term");
    }
  }

  std::vector<Word> domain(const InputKey& k, const symexec::TransitionFn& f) const
  {
    switch (k.kind) {
    case InputKind::Slot:
      return slot_domain(m_.layout[k.index], width_, m_.addrs.size());
    case InputKind::Alive:
      return range(2);
    case InputKind::EventTag:
      return range(static_cast<unsigned>(m_.events.events.size() + 1));
    case InputKind::Arg:
      return interp::domain_of(f.params.at(k.index).type, *b_.interp);
    default:
      return range(1u << width_);
    }
  }

  /// Background state: zero, or pseudo-random valid values.
  void fill(unsigned which, const symexec::TransitionFn& f, model::SystemState& s, model::TxParams& tx) const
  {
    std::mt19937_64 rng(0x5eed + which);
    auto pick = [&](const std::vector<Word>& d) { return which == 0 ? d.front() : d[rng() % d.size()]; };
    s.vars.assign(m_.layout.size(), 0);
    for (std::size_t i = 0; i < m_.layout.size(); ++i)
      s.vars[i] = pick(slot_domain(m_.layout[i], width_, m_.addrs.size()));
    s.alive = true;
    s.event = which == 0 ? std::nullopt : event_of(static_cast<unsigned>(rng() % (m_.events.events.size() + 1)));
    s.balances.assign(m_.addrs.size(), 0);
    for (auto& v : s.balances)
      v = pick(range(1u << width_));
    s.blocktime = pick(range(1u << width_));
    tx.value = pick(range(1u << width_));
    tx.time = pick(range(1u << width_));
    for (std::size_t p = 0; p < f.params.size(); ++p) {
      if (f.params[p].sort != model::ScalarSort::Addr)
        tx.args[p] = pick(interp::domain_of(f.params[p].type, *b_.interp));
    }
  }

  /// One (state, call) case against the symbolic terms `t` (pre first).
  void compare(const std::vector<Term>& t, const symexec::TransitionFn& f, const model::SystemState& s,
               const model::TxParams& tx)
  {
    ++st_.cases;
    term::Evaluator ev([&](const Input& in, const term::Sort&) { return read(in, s, tx); });
    bool pre = ev(t[0]) != 0;
    interp::TxOutcome out;
    std::string error;
    try {
      out = b_.interp->exec_tx(s, tx);
    } catch (const std::exception& e) {
      error = e.what();
    }
    if (!error.empty() || out.committed != pre) {
      ++st_.preMismatch;
      note(f, s, tx, error.empty() ? std::string(out.committed ? "commits" : "reverts") + " but pre is " + (pre ? "true" : "false")
                                   : "interpreter error: " + error);
      return;
    }
    if (!out.committed) {
      ++st_.reverted;
      return;
    }
    ++st_.committed;
    const auto& post = out.state;
    std::size_t k = 1;
    std::string bad;
    for (std::size_t i = 0; i < m_.layout.size(); ++i, ++k) {
      if (ev(t[k]) != post.vars[i])
        bad = m_.layout[i].name;
    }
    for (std::size_t a = 0; a < m_.addrs.size(); ++a, ++k) {
      if (ev(t[k]) != post.balances[a])
        bad = "balance[" + m_.addrs.name(static_cast<unsigned>(a)) + "]";
    }
    if ((ev(t[k++]) != 0) != post.alive)
      bad = "alive";
    unsigned tag = static_cast<unsigned>(ev(t[k++]));
    if (tag != tag_of(post.event))
      bad = "event";
    for (unsigned i = 0; i < 4; ++i, ++k) {
      if (post.event && i < post.event->args.size() && ev(t[k]) != post.event->args[i])
        bad = "event argument " + std::to_string(i);
    }
    if (ev(t[k]) != post.blocktime)
      bad = "blocktime";
    if (!bad.empty()) {
      ++st_.postMismatch;
      note(f, s, tx, "update differs at " + bad);
    }
  }

  static std::vector<Term> terms_of(const symexec::TransitionFn& f)
  {
    std::vector<Term> t{f.pre};
    t.insert(t.end(), f.slots.begin(), f.slots.end());
    t.insert(t.end(), f.balances.begin(), f.balances.end());
    t.push_back(f.alive);
    t.push_back(f.eventTag);
    t.insert(t.end(), f.eventArgs.begin(), f.eventArgs.end());
    t.push_back(f.blocktime);
    return t;
  }

  void note(const symexec::TransitionFn& f, const model::SystemState& s, const model::TxParams& tx, const std::string& what)
  {
    if (st_.examples.size() >= 5)
      return;
    st_.examples.push_back(model::format_tx(tx, *b_.ast, m_.addrs) + ": " + what + "\n" +
                           model::format_state(s, m_.layout, m_.addrs));
    (void)f;
  }

  void exhaustive(unsigned fills, std::uint64_t limit)
  {
    for (const auto& f : m_.functions) {
      std::vector<std::size_t> addrArgs;
      for (std::size_t p = 0; p < f.params.size(); ++p) {
        if (f.params[p].sort == model::ScalarSort::Addr)
          addrArgs.push_back(p);
      }
      const std::vector<Term> full = terms_of(f);
      const auto nAddr = static_cast<unsigned>(m_.addrs.size());
      std::uint64_t combos = nAddr;
      for (std::size_t i = 0; i < addrArgs.size(); ++i)
        combos *= nAddr;
      for (std::uint64_t c = 0; c < combos; ++c) {
        model::TxParams tx;
        tx.fname = f.fname;
        tx.args.assign(f.params.size(), 0);
        std::uint64_t rest = c;
        tx.sender = static_cast<unsigned>(rest % nAddr);
        rest /= nAddr;
        for (auto p : addrArgs) {
          tx.args[p] = rest % nAddr;
          rest /= nAddr;
        }
        term::Substituter sub([&](const Input& in, const term::Sort&) -> std::optional<Term> {
          if (in.kind == InputKind::Sender)
            return term::mk_addr(tx.sender);
          if (in.kind == InputKind::Arg && f.params.at(in.index).sort == model::ScalarSort::Addr)
            return term::mk_addr(static_cast<unsigned>(tx.args[in.index]));
          return std::nullopt;
        });
        std::vector<Term> t;
        for (const auto& x : full)
          t.push_back(sub(x));
        // a post term that is a bare copy of one input (a slot left alone,
        // blocktime' = time) does not widen the support; such inputs are
        // checked against the background fills only
        std::set<InputKey> support;
        for (std::size_t i = 0; i < t.size(); ++i) {
          if (i > 0 && t[i]->op == term::Op::Var)
            continue;
          for (const auto& [in, sort] : term::free_inputs(t[i]))
            support.insert({in.kind, in.index});
        }
        std::vector<InputKey> keys(support.begin(), support.end());
        std::vector<std::vector<Word>> doms;
        std::uint64_t total = 1;
        for (const auto& k : keys) {
          doms.push_back(domain(k, f));
          total *= doms.back().size();
          if (total > limit)
            throw std::runtime_error("differential: " + f.fname + " needs more than " + std::to_string(limit) + " cases");
        }
        for (unsigned w = 0; w < fills; ++w) {
          model::SystemState s;
          fill(w, f, s, tx);
          std::vector<std::size_t> idx(keys.size(), 0);
          for (std::size_t i = 0; i < keys.size(); ++i)
            write(keys[i], doms[i][0], s, tx);
          while (true) {
            compare(t, f, s, tx);
            std::size_t i = 0;
            for (; i < keys.size(); ++i) {
              if (++idx[i] < doms[i].size()) {
                write(keys[i], doms[i][idx[i]], s, tx);
                break;
              }
              idx[i] = 0;
              write(keys[i], doms[i][0], s, tx);
            }
            if (i == keys.size())
              break;
          }
        }
      }
    }
  }

  void sampled(std::uint64_t samples, std::uint64_t seed)
  {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<Term>> terms;
    for (const auto& f : m_.functions)
      terms.push_back(terms_of(f));
    for (std::uint64_t n = 0; n < samples; ++n) {
      std::size_t j = rng() % m_.functions.size();
      const auto& f = m_.functions[j];
      model::SystemState s;
      model::TxParams tx;
      tx.fname = f.fname;
      tx.args.assign(f.params.size(), 0);
      fill(1 + static_cast<unsigned>(rng() % 1000000), f, s, tx);
      s.alive = rng() % 8 != 0;
      tx.sender = static_cast<unsigned>(rng() % m_.addrs.size());
      for (std::size_t p = 0; p < f.params.size(); ++p) {
        if (f.params[p].sort == model::ScalarSort::Addr)
          tx.args[p] = rng() % m_.addrs.size();
      }
      // small values make requires pass more often
      if (rng() % 2)
        tx.value = rng() % 3;
      compare(terms[j], f, s, tx);
    }
  }

private:
  const Bundle& b_;
  const symexec::ContractModel& m_;
  DiffStats& st_;
  unsigned width_;
};

} // namespace

DiffStats differential(const Bundle& b, unsigned fills, std::uint64_t limit)
{
  DiffStats st;
  DiffRunner(b, st).exhaustive(fills, limit);
  return st;
}

DiffStats differential_sampled(const Bundle& b, std::uint64_t samples, std::uint64_t seed)
{
  DiffStats st;
  DiffRunner(b, st).sampled(samples, seed);
  return st;
}

// ---------------------------------------------------------------------------

std::set<model::SystemState> smt_states_at(const Bundle& b, const std::vector<Word>& balances, const Word& blocktime,
                                           unsigned len, unsigned maxStates)
{
  const auto& m = *b.model;
  smt::Encoder enc(m);
  smt::Context ctx(m, solver_options(120), "reach");
  ctx.assert_term(enc.initial());
  auto s0 = enc.state(0);
  for (std::size_t a = 0; a < s0.balances.size(); ++a)
    ctx.assert_term(term::eq(s0.balances[a], term::mk_bv(balances.at(a), m.width())));
  ctx.assert_term(term::eq(s0.blocktime, term::mk_bv(blocktime, m.width())));
  for (unsigned i = 1; i <= len; ++i)
    ctx.assert_term(enc.transition(i));
  ctx.assert_term(enc.time_monotonic(len));
  ctx.assert_term(enc.no_self_call(len));
  std::vector<Term> wanted = enc.state(len).all();
  std::set<model::SystemState> out;
  while (out.size() < maxStates) {
    auto q = ctx.check(wanted);
    if (q.status == smt::Status::Unsat)
      return out;
    if (q.status != smt::Status::Sat)
      throw std::runtime_error("reachability query: " + q.reason);
    out.insert(enc.decode_state(q.values, len));
    std::vector<Term> differ;
    for (const auto& v : wanted)
      differ.push_back(term::not_(term::eq(v, term::mk_const(q.values.at(v->input.name), v->sort))));
    ctx.assert_term(term::or_(differ));
  }
  throw std::runtime_error("reachability: more than " + std::to_string(maxStates) + " states");
}

std::set<model::SystemState> smt_reachable(const Bundle& b, const std::vector<Word>& balances, const Word& blocktime,
                                           unsigned k)
{
  std::set<model::SystemState> all;
  for (unsigned len = 0; len <= k; ++len) {
    auto s = smt_states_at(b, balances, blocktime, len);
    all.insert(s.begin(), s.end());
  }
  return all;
}

} // namespace solbmc::testing
