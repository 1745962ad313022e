#include "solbmc/checker.hpp"

#include <cctype>
#include <chrono>
#include <sstream>

namespace solbmc::checker {

using namespace term;
using spec::PropKind;

std::string_view verdict_name(Verdict v)
{
  switch (v) {
  case Verdict::Holds:
    return "holds";
  case Verdict::Violated:
    return "violated";
  case Verdict::Unknown:
    return "unknown";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string safe_name(const std::string& s)
{
  std::string out;
  for (char c : s)
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

/// Runs one query and records it. Returns nullopt after marking `r` Unknown.
std::optional<smt::QueryResult> run(smt::Context& ctx, const std::vector<Term>& wanted, const std::string& label,
                                    unsigned length, CheckResult& r, const CheckOptions& opt)
{
  smt::QueryResult q = ctx.check(wanted);
  r.queries.push_back({label, length, q.status, q.seconds});
  if (opt.onQuery)
    opt.onQuery(r.property, r.queries.back());
  r.bound = std::max(r.bound, length);
  if (q.status == smt::Status::Unknown) {
    r.verdict = Verdict::Unknown;
    r.detail = label + ": " + (q.reason.empty() ? "unknown" : q.reason);
    return std::nullopt;
  }
  return q;
}

std::string format_binder(const std::string& name, spec::PType t, const Word& v, const model::AddrDomain& addrs)
{
  switch (t) {
  case spec::PType::Addr:
    return name + " = " + (v < addrs.size() ? addrs.name(static_cast<unsigned>(v)) : v.str());
  case spec::PType::Bool:
    return name + " = " + (v != 0 ? "true" : "false");
  default:
    return name + " = " + v.str();
  }
}

} // namespace

Checker::Checker(const symexec::ContractModel& m, const interp::Interpreter& in, CheckOptions opt)
    : m_(m), in_(in), opt_(std::move(opt))
{
}

CheckResult Checker::check(const spec::Property& p) const
{
  switch (p.kind) {
  case PropKind::Invariant:
    return check_invariant(p);
  case PropKind::Trace:
    return check_trace(p);
  case PropKind::EventChain:
    return check_event_chain(p);
  case PropKind::CallPossibility:
    return check_call_possibility(p);
  }
  throw std::logic_error("unknown property kind");
}

CheckResult Checker::check_invariant(const spec::Property& p) const
{
  auto start = Clock::now();
  CheckResult r;
  r.property = p.name;
  r.kind = p.kind;
  smt::Encoder enc(m_);
  auto lp = spec::lower_property(p, m_);

  {
    smt::Context ctx(m_, opt_.solver, safe_name(p.name) + "_base");
    ctx.assert_term(enc.initial());
    ctx.assert_term(not_(enc.at(lp.pred, 0, nullptr, nullptr)));
    auto q = run(ctx, enc.trace_vars(0), "base", 0, r, opt_);
    if (!q) {
      r.seconds = since(start);
      return r;
    }
    if (q->status == smt::Status::Sat) {
      r.verdict = Verdict::Violated;
      r.detail = "base case: an initial state violates the invariant";
      r.ce = enc.decode(q->values, 0);
      confirm(p, r);
      r.seconds = since(start);
      return r;
    }
  }

  smt::Context ctx(m_, opt_.solver, safe_name(p.name) + "_step");
  ctx.assert_term(enc.at(lp.pred, 0, nullptr, nullptr));
  ctx.assert_term(enc.transition(1));
  ctx.assert_term(enc.time_monotonic(1));
  ctx.assert_term(enc.no_self_call(1));
  ctx.assert_term(not_(enc.at(lp.pred, 1, nullptr, nullptr)));
  std::vector<Term> wanted = enc.state(0).all();
  for (const auto& v : enc.state(1).all())
    wanted.push_back(v);
  for (const auto& v : enc.tx(1).all())
    wanted.push_back(v);
  // one query per (function, sender)
  smt::TxVars t1 = enc.tx(1);
  std::optional<smt::QueryResult> found;
  for (std::size_t j = 0; j < m_.functions.size() && !found; ++j) {
    for (unsigned a = 1; a <= m_.addrs.user_count() && !found; ++a) {
      ctx.push();
      ctx.assert_term(eq(t1.fn, mk_fn(static_cast<unsigned>(j))));
      ctx.assert_term(eq(t1.sender, mk_addr(m_.addrs.user(a))));
      auto q = run(ctx, wanted, "step " + m_.functions[j].fname + " from " + m_.addrs.name(m_.addrs.user(a)), 1, r, opt_);
      ctx.pop();
      if (!q) {
        r.seconds = since(start);
        return r;
      }
      if (q->status == smt::Status::Sat)
        found = std::move(q);
    }
  }
  if (found) {
    const auto& q = found;
    model::CounterExample ce;
    ce.fromInitial = false;
    ce.steps.push_back({std::nullopt, enc.decode_state(q->values, 0)});
    ce.steps.push_back({enc.decode_tx(q->values, 1), enc.decode_state(q->values, 1)});
    r.transition = ce.steps[1].tx->fname;
    r.verdict = Verdict::Violated;
    r.detail = "inductive-step counter-example (possibly unreachable)";
    r.ce = std::move(ce);
    confirm(p, r);
  } else {
    r.verdict = Verdict::Holds;
    r.detail = "holds: base case and inductive step are unsatisfiable";
  }
  r.seconds = since(start);
  return r;
}

CheckResult Checker::check_trace(const spec::Property& p) const
{
  auto start = Clock::now();
  CheckResult r;
  r.property = p.name;
  r.kind = p.kind;
  unsigned kmax = (p.traceK && !opt_.kmaxSet) ? p.traceK : opt_.kmax;
  unsigned kmin = opt_.kmin;
  unsigned last = kmax > kmin ? kmax - 1 : kmin;
  smt::Encoder enc(m_);
  auto lp = spec::lower_property(p, m_);
  smt::Context ctx(m_, opt_.solver, safe_name(p.name));
  ctx.assert_term(enc.initial());
  for (unsigned i = 0; i <= last; ++i) {
    if (i > 0) {
      ctx.assert_term(enc.transition(i));
      ctx.assert_term(enc.time_monotonic(i));
      ctx.assert_term(enc.no_self_call(i));
      ctx.assert_term(lemma(enc, i));
    }
    if (i < kmin)
      continue;
    ctx.push();
    ctx.assert_term(not_(enc.at(lp.pred, i, nullptr, nullptr)));
    auto q = run(ctx, enc.trace_vars(i), "i=" + std::to_string(i), i, r, opt_);
    ctx.pop();
    if (!q)
      break;
    if (q->status == smt::Status::Sat) {
      r.verdict = Verdict::Violated;
      r.detail = "violated by a trace of length " + std::to_string(i);
      r.ce = enc.decode(q->values, i);
      confirm(p, r);
      break;
    }
  }
  if (r.verdict == Verdict::Unknown && r.detail.empty()) {
    r.verdict = Verdict::Holds;
    r.detail = "holds up to k=" + std::to_string(std::max(kmax, kmin));
  }
  r.seconds = since(start);
  return r;
}

CheckResult Checker::check_event_chain(const spec::Property& p) const { return check_windowed(p); }

CheckResult Checker::check_call_possibility(const spec::Property& p) const { return check_windowed(p); }

CheckResult Checker::check_windowed(const spec::Property& p) const
{
  auto start = Clock::now();
  CheckResult r;
  r.property = p.name;
  r.kind = p.kind;
  unsigned first = opt_.kminSet ? opt_.kmin : std::max(3u, opt_.kmin);
  unsigned kmax = opt_.kmax;
  if (kmax > 256)
    throw std::invalid_argument("trace length above 256 is not supported");
  bool call = p.kind == PropKind::CallPossibility;

  smt::Encoder enc(m_);
  auto lp = spec::lower_property(p, m_);
  const symexec::TransitionFn* f = lp.fn;
  smt::TxVars probe;
  if (call)
    probe = enc.tx_vars("probe_");

  const Sort idxSort = Sort::bv(8);
  Term im = smt::var("idx_m", idxSort), iq = smt::var("idx_q", idxSort), in = smt::var("idx_n", idxSort);

  std::vector<Term> extra{im, iq, in};
  extra.insert(extra.end(), lp.binders.begin(), lp.binders.end());
  if (call) {
    extra.insert(extra.end(), {probe.value, probe.sender, probe.time});
    for (std::size_t k = 0; k < f->params.size(); ++k)
      extra.push_back(enc.arg_var(probe, *f, k));
  }

  // constraints on one position j, asserted once the path reaches j
  auto position = [&](unsigned j) {
    Term jt = mk_bv(j, 8);
    std::vector<Term> c;
    c.push_back(implies(eq(im, jt), enc.at(lp.e1, j, nullptr, nullptr)));
    c.push_back(implies(eq(in, jt), enc.at(lp.e2, j, nullptr, nullptr)));
    Term witness;
    if (call) {
      Term pre = enc.pre(*f, j, probe);
      witness = and_({p.always ? not_(pre) : pre, enc.at(lp.where, j, &probe, f), enc.at(lp.callArgs, j, &probe, f),
                      ugt(probe.time, enc.state(j).blocktime)});
    } else {
      witness = and_(enc.at(lp.e3, j, nullptr, nullptr), enc.at(lp.where, j, nullptr, nullptr));
    }
    c.push_back(implies(eq(iq, jt), witness));
    return and_(c);
  };

  auto open = [&](smt::Context& ctx) {
    ctx.assert_term(enc.initial());
    ctx.assert_term(ult(im, iq));
    ctx.assert_term(ult(iq, in));
    if (call) {
      ctx.assert_term(not_(eq(probe.sender, mk_addr(m_.addrs.no_addr()))));
      ctx.assert_term(not_(eq(probe.sender, mk_addr(m_.addrs.contract()))));
    }
    ctx.assert_term(position(0));
  };
  auto extend = [&](smt::Context& ctx, unsigned i) {
    ctx.assert_term(enc.transition(i));
    ctx.assert_term(enc.time_monotonic(i));
    ctx.assert_term(enc.no_self_call(i));
    ctx.assert_term(lemma(enc, i));
    ctx.assert_term(position(i));
  };
  auto wanted = [&](unsigned i) {
    std::vector<Term> w = enc.trace_vars(i);
    w.insert(w.end(), extra.begin(), extra.end());
    return w;
  };
  // decodes a sat path of length i, cut after the closing event n
  auto found = [&](const smt::QueryResult& q, unsigned i) {
    auto ce = enc.decode(q.values, i);
    auto get = [&](const Term& t) { return static_cast<unsigned>(q.values.at(t->input.name)); };
    ce.witness = model::Witness{get(im), get(iq), get(in)};
    ce.steps.resize(ce.witness->n + 1);
    std::string focus = "step = " + std::to_string(ce.witness->q);
    for (const auto& [name, type] : p.binders)
      focus += ", " + format_binder(name, type, q.values.at(spec::binder_var_name(name)), m_.addrs);
    ce.focus = focus;
    if (call)
      ce.probe = enc.decode_call(q.values, probe, *f);
    return ce;
  };

  std::optional<model::CounterExample> best;
  std::string shrinkNote;
  unsigned top = kmax > 0 ? kmax - 1 : 0;
  if (!opt_.kminSet && opt_.shrinkSeconds > 0 && top > first) {
    smt::Context ctx(m_, opt_.solver, safe_name(p.name) + "_top");
    open(ctx);
    for (unsigned i = 1; i <= top; ++i)
      extend(ctx, i);
    ctx.assert_term(ule(in, mk_bv(top, 8)));
    auto q = run(ctx, wanted(top), "n<=" + std::to_string(top), top, r, opt_);
    if (!q) {
      r.seconds = since(start);
      return r;
    }
    if (q->status == smt::Status::Sat) {
      best = found(*q, top);
      while (best->length() > first) {
        unsigned bound = static_cast<unsigned>(best->length()) - 1;
        smt::Context shorter(m_, opt_.solver, safe_name(p.name) + "_n" + std::to_string(bound));
        shorter.set_timeout(std::min(opt_.solver.timeoutSeconds, opt_.shrinkSeconds));
        open(shorter);
        for (unsigned i = 1; i <= bound; ++i)
          extend(shorter, i);
        shorter.assert_term(ule(in, mk_bv(bound, 8)));
        smt::QueryResult s = shorter.check(wanted(bound));
        r.queries.push_back({"n<=" + std::to_string(bound), bound, s.status, s.seconds});
        if (opt_.onQuery)
          opt_.onQuery(r.property, r.queries.back());
        if (s.status == smt::Status::Unknown)
          shrinkNote = "; no shorter trace within " + std::to_string(bound) + " steps was found in the time budget";
        if (s.status != smt::Status::Sat)
          break;
        best = found(s, bound);
      }
    }
  }

  if (!best) {
    smt::Context ctx(m_, opt_.solver, safe_name(p.name));
    open(ctx);
    for (unsigned i = 1; i < kmax; ++i) {
      extend(ctx, i);
      if (i < first)
        continue;
      ctx.push();
      ctx.assert_term(ule(in, mk_bv(i, 8)));
      auto q = run(ctx, wanted(i), "i=" + std::to_string(i), i, r, opt_);
      ctx.pop();
      if (!q) {
        r.seconds = since(start);
        return r;
      }
      if (q->status == smt::Status::Sat) {
        best = found(*q, i);
        break;
      }
    }
  }

  if (best) {
    r.verdict = Verdict::Violated;
    r.detail = "violated by a trace of length " + std::to_string(best->length()) + shrinkNote;
    r.ce = std::move(best);
    confirm(p, r);
  } else {
    r.verdict = Verdict::Holds;
    r.detail = kmax > first ? "holds up to k=" + std::to_string(kmax)
                            : "holds vacuously: no path length in [" + std::to_string(first) + ", " + std::to_string(kmax) + ")";
  }
  r.seconds = since(start);
  return r;
}

Term Checker::lemma(const smt::Encoder& enc, unsigned i) const
{
  if (!opt_.lemmas || m_.functions.empty())
    return mk_bool(true);
  if (!conserves_) {
    // split like the invariant step; paths only have user senders
    smt::Context ctx(m_, opt_.solver, "conservation");
    ctx.assert_term(enc.conservation_violation());
    ctx.assert_term(enc.no_self_call(1));
    smt::TxVars t1 = enc.tx(1);
    conserves_ = true;
    for (std::size_t j = 0; j < m_.functions.size() && *conserves_; ++j) {
      for (unsigned a = 1; a <= m_.addrs.user_count() && *conserves_; ++a) {
        ctx.push();
        ctx.assert_term(eq(t1.fn, mk_fn(static_cast<unsigned>(j))));
        ctx.assert_term(eq(t1.sender, mk_addr(m_.addrs.user(a))));
        auto q = ctx.check({});
        ctx.pop();
        if (opt_.onQuery)
          opt_.onQuery("(lemma)", {"conservation " + m_.functions[j].fname + " from " + m_.addrs.name(m_.addrs.user(a)),
                                   1, q.status, q.seconds});
        conserves_ = q.status == smt::Status::Unsat;
      }
    }
  }
  return *conserves_ ? enc.conserved(i) : mk_bool(true);
}

void Checker::confirm(const spec::Property& p, CheckResult& r) const
{
  const auto& ce = *r.ce;
  r.replay = interp::replay(ce, in_);
  spec::EvalEnv env;
  env.ast = &in_.ast();
  env.layout = &m_.layout;
  env.addrs = &m_.addrs;
  env.width = m_.width();
  const auto& st = ce.steps;
  try {
    switch (p.kind) {
    case PropKind::Invariant:
      if (ce.fromInitial) {
        r.violationConfirmed = !spec::holds(*p.pred, st[0].state, env);
      } else {
        r.violationConfirmed = spec::holds(*p.pred, st[0].state, env) && !spec::holds(*p.pred, st[1].state, env);
      }
      r.violationNote = r.violationConfirmed ? "invariant fails on the final state" : "invariant holds on the trace";
      break;
    case PropKind::Trace:
      r.violationConfirmed = !spec::holds(*p.pred, st.back().state, env);
      r.violationNote = r.violationConfirmed ? "predicate fails on the final state" : "predicate holds on the trace";
      break;
    case PropKind::EventChain:
    case PropKind::CallPossibility: {
      const auto& w = *ce.witness;
      if (w.n >= st.size() || !(w.m < w.q && w.q < w.n)) {
        r.violationNote = "witness indices out of range";
        break;
      }
      // binders are free in the model; re-derive them from the events
      if (!spec::match_event(p.e1, st[w.m].state.event, env)) {
        r.violationNote = "event at step " + std::to_string(w.m) + " does not match " + p.e1.event;
        break;
      }
      if (!spec::match_event(p.e2, st[w.n].state.event, env)) {
        r.violationNote = "event at step " + std::to_string(w.n) + " does not match " + p.e2.event;
        break;
      }
      const auto& sq = st[w.q].state;
      if (p.kind == PropKind::EventChain) {
        if (!spec::match_event(p.e3, sq.event, env)) {
          r.violationNote = "event at step " + std::to_string(w.q) + " does not match " + p.e3.event;
          break;
        }
        if (p.where && !spec::holds(*p.where, sq, env)) {
          r.violationNote = "where clause is false";
          break;
        }
        r.violationConfirmed = true;
        r.violationNote = "forbidden event between the two endpoints";
        break;
      }
      const auto& probe = *ce.probe;
      env.call = &probe;
      for (std::size_t k = 0; k < p.callArgs.size(); ++k) {
        const auto& a = p.callArgs[k];
        Word v = probe.args.at(k);
        if (a.kind == spec::PatArg::Kind::Literal && v != a.value) {
          r.violationNote = "probe argument " + std::to_string(k) + " differs from the pattern";
          return;
        }
        if (a.kind == spec::PatArg::Kind::Binder) {
          auto [it, fresh] = env.binders.emplace(a.name, v);
          if (!fresh && it->second != v) {
            r.violationNote = "probe argument " + std::to_string(k) + " differs from binder " + a.name;
            return;
          }
        }
      }
      if (p.where && !spec::holds(*p.where, sq, env)) {
        r.violationNote = "where clause is false for the probe call";
        break;
      }
      if (probe.time <= sq.blocktime) {
        r.violationNote = "probe call is not after step " + std::to_string(w.q);
        break;
      }
      auto out = in_.exec_tx(sq, probe);
      if (p.always) {
        r.violationConfirmed = !out.committed;
        r.violationNote = out.committed ? "probe call succeeds"
                                        : "probe call reverts (" + std::string(interp::reason_name(out.reason)) + ")";
      } else {
        r.violationConfirmed = out.committed;
        r.violationNote = out.committed ? "probe call succeeds" : "probe call reverts";
      }
      break;
    }
    }
  } catch (const std::exception& e) {
    r.violationConfirmed = false;
    r.violationNote = std::string("re-check failed: ") + e.what();
  }
}

std::string format_result(const CheckResult& r, const symexec::ContractModel& m)
{
  std::ostringstream os;
  const auto& ast = *m.ast;
  os << r.property << ": " << verdict_name(r.verdict) << " (" << spec::kind_name(r.kind) << "; " << r.detail << ")\n";
  if (r.ce) {
    const auto& ce = *r.ce;
    if (!r.transition.empty())
      os << "transition: " << r.transition << "\n";
    os << model::format_transcript(ce, ast, m.addrs);
    if (!ce.focus.empty())
      os << "\n" << ce.focus << "\n";
    os << "\ntransactions:\n";
    for (std::size_t i = 1; i < ce.steps.size(); ++i)
      os << "  " << i << ". " << model::format_tx(*ce.steps[i].tx, ast, m.addrs) << "\n";
    if (ce.probe)
      os << "probe at step " << ce.witness->q << ": " << model::format_tx(*ce.probe, ast, m.addrs) << "\n";
    if (!ce.fromInitial) {
      os << "pre-state:\n" << model::format_state(ce.steps[0].state, m.layout, m.addrs);
      os << "post-state:\n" << model::format_state(ce.steps[1].state, m.layout, m.addrs);
    }
    if (r.replay)
      os << "replay: " << (r.replay->confirmed ? "confirmed" : "MISMATCH") << "; " << r.violationNote << "\n";
    if (r.replay && !r.replay->confirmed)
      os << r.replay->str();
  }
  double total = 0;
  for (const auto& q : r.queries)
    total += q.seconds;
  os << "queries: " << r.queries.size() << ", solver time " << total << " s, total " << r.seconds << " s\n";
  return os.str();
}

nlohmann::json result_to_json(const CheckResult& r, const symexec::ContractModel& m)
{
  nlohmann::json j;
  j["property"] = r.property;
  j["kind"] = std::string(spec::kind_name(r.kind));
  j["verdict"] = std::string(verdict_name(r.verdict));
  j["detail"] = r.detail;
  j["bound"] = r.bound;
  j["seconds"] = r.seconds;
  auto qs = nlohmann::json::array();
  for (const auto& q : r.queries)
    qs.push_back({{"label", q.label}, {"length", q.length}, {"status", std::string(smt::status_name(q.status))},
                  {"seconds", q.seconds}});
  j["queries"] = qs;
  if (r.ce) {
    j["counterexample"] = model::trace_to_json(*r.ce, *m.ast, m.layout, m.addrs);
    if (!r.transition.empty())
      j["transition"] = r.transition;
    j["replay"] = {{"confirmed", r.replay && r.replay->confirmed}, {"report", r.replay ? r.replay->str() : ""}};
    j["violationConfirmed"] = r.violationConfirmed;
    j["violationNote"] = r.violationNote;
  }
  return j;
}

} // namespace solbmc::checker
