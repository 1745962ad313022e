#include "solbmc/smt.hpp"

#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace solbmc::smt {

using namespace term;

std::string_view status_name(Status s)
{
  switch (s) {
  case Status::Sat:
    return "sat";
  case Status::Unsat:
    return "unsat";
  default:
    return "unknown";
  }
}

std::string symbol(const std::string& name)
{
  auto simple = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("~!$%^&*_-+=<>.?/").find(c) != std::string_view::npos;
  };
  bool ok = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
  for (char c : name)
    ok = ok && simple(c);
  return ok ? name : "|" + name + "|";
}

namespace {

std::string unquote(const std::string& s)
{
  if (s.size() >= 2 && s.front() == '|' && s.back() == '|')
    return s.substr(1, s.size() - 2);
  return s;
}

std::string bv_text(const Word& v, unsigned w)
{
  if (w % 4 == 0) {
    std::ostringstream os;
    os << std::hex << v;
    std::string h = os.str();
    if (h.size() < w / 4)
      h.insert(0, w / 4 - h.size(), '0');
    return "#x" + h;
  }
  std::string b(w, '0');
  for (unsigned i = 0; i < w; ++i) {
    if (bit_test(v, i))
      b[w - 1 - i] = '1';
  }
  return "#b" + b;
}

std::string op_name(Op op)
{
  switch (op) {
  case Op::Not:
    return "not";
  case Op::And:
    return "and";
  case Op::Or:
    return "or";
  case Op::Implies:
    return "=>";
  case Op::Ite:
    return "ite";
  case Op::Eq:
    return "=";
  case Op::Add:
    return "bvadd";
  case Op::Sub:
    return "bvsub";
  case Op::Mul:
    return "bvmul";
  case Op::Udiv:
    return "bvudiv";
  case Op::Urem:
    return "bvurem";
  case Op::Neg:
    return "bvneg";
  case Op::Ult:
    return "bvult";
  case Op::Ule:
    return "bvule";
  default:
    return "?";
  }
}

} // namespace

Context::Context(const symexec::ContractModel& m, SolverOptions opt, std::string name)
    : model_(m), opt_(std::move(opt)), name_(std::move(name))
{
  solverPath_ = resolve_solver_path(opt_.path);
  solverArgs_ = default_solver_args(solverPath_);
  solverArgs_.insert(solverArgs_.end(), opt_.args.begin(), opt_.args.end());
  scopes_.emplace_back();

  std::ostringstream os;
  os << "(set-option :produce-models true)\n(set-logic QF_DTBV)\n";
  os << "(declare-datatypes ((Addr 0) (Event 0) (Fn 0)) (\n  (";
  for (const auto& n : m.addrs.names())
    os << " (" << n << ")";
  os << ")\n  ((NoEvent)";
  for (const auto* ev : m.events.events)
    os << " (ev_" << ev->name << ")";
  os << ")\n  (";
  if (m.functions.empty())
    os << " (fn_none)";
  for (const auto& f : m.functions)
    os << " (fn_" << f.fname << ")";
  os << ")))\n";
  script_ = os.str();
}

Context::~Context() = default;

std::string Context::sort_text(const Sort& s) const
{
  switch (s.kind) {
  case SortKind::Bool:
    return "Bool";
  case SortKind::BV:
    return "(_ BitVec " + std::to_string(s.width) + ")";
  case SortKind::Addr:
    return "Addr";
  case SortKind::Event:
    return "Event";
  case SortKind::Fn:
    return "Fn";
  }
  return "?";
}

std::string Context::const_text(const Node& n) const
{
  switch (n.sort.kind) {
  case SortKind::Bool:
    return n.value != 0 ? "true" : "false";
  case SortKind::BV:
    return bv_text(n.value, n.sort.width);
  case SortKind::Addr:
    return model_.addrs.name(static_cast<unsigned>(n.value));
  case SortKind::Event:
    return n.value == 0 ? "NoEvent" : "ev_" + model_.events.name_of(static_cast<unsigned>(n.value));
  case SortKind::Fn:
    if (model_.functions.empty())
      return "fn_none";
    return "fn_" + model_.functions.at(static_cast<std::size_t>(n.value)).fname;
  }
  return "?";
}

void Context::emit(const std::string& text) { script_ += text; }

void Context::declare(const Input& in, const Sort& s)
{
  if (in.kind != InputKind::Named)
    throw std::logic_error("model input reached the solver unencoded");
  auto it = declared_.find(in.name);
  if (it != declared_.end()) {
    if (!(it->second == s))
      throw std::logic_error("variable '" + in.name + "' declared with two sorts");
    return;
  }
  declared_.emplace(in.name, s);
  scopes_.back().declared.push_back(in.name);
  emit("(declare-fun " + symbol(in.name) + " () " + sort_text(s) + ")\n");
}

std::string Context::render(const Term& root, std::unordered_map<const Node*, unsigned>& refs)
{
  // count how often each node is referenced inside this assertion
  std::vector<const Node*> stack{root.get()};
  refs[root.get()] = 1;
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (defined_.count(n))
      continue;
    for (const auto& k : n->kids) {
      if (refs[k.get()]++ == 0)
        stack.push_back(k.get());
    }
  }
  std::unordered_map<const Node*, std::string> memo;
  std::function<std::string(const Term&)> text = [&](const Term& t) -> std::string {
    const Node* n = t.get();
    if (auto d = defined_.find(n); d != defined_.end())
      return d->second.first;
    if (auto m = memo.find(n); m != memo.end())
      return m->second;
    std::string s;
    switch (n->op) {
    case Op::Const:
      s = const_text(*n);
      break;
    case Op::Var:
      s = symbol(n->input.name);
      break;
    case Op::ZeroExt:
      s = "((_ zero_extend " + std::to_string(n->p0) + ") " + text(n->kids[0]) + ")";
      break;
    case Op::Extract:
      s = "((_ extract " + std::to_string(n->p0) + " " + std::to_string(n->p1) + ") " + text(n->kids[0]) + ")";
      break;
    default:
      s = "(" + op_name(n->op);
      for (const auto& k : n->kids)
        s += " " + text(k);
      s += ")";
    }
    if (refs[n] >= 2 && !n->kids.empty()) {
      std::string name = "_d" + std::to_string(defCounter_++);
      emit("(define-fun " + name + " () " + sort_text(n->sort) + " " + s + ")\n");
      defined_.emplace(n, std::make_pair(name, t));
      scopes_.back().defined.push_back(n);
      return name;
    }
    memo.emplace(n, s);
    return s;
  };
  return text(root);
}

void Context::assert_term(const Term& t)
{
  for (const auto& [in, s] : free_inputs(t))
    declare(in, s);
  std::unordered_map<const Node*, unsigned> refs;
  std::string body = render(t, refs);
  emit("(assert " + body + ")\n");
}

void Context::push()
{
  scopes_.emplace_back();
  emit("(push 1)\n");
}

void Context::pop()
{
  if (scopes_.size() <= 1)
    throw std::logic_error("pop without push");
  for (const auto& n : scopes_.back().declared)
    declared_.erase(n);
  for (const auto* n : scopes_.back().defined)
    defined_.erase(n);
  scopes_.pop_back();
  emit("(pop 1)\n");
}

Word Context::decode_value(const SExpr& e, const Sort& s) const
{
  auto bad = [&]() -> Word { throw SolverProcessError("cannot read solver value '" + e.str() + "'"); };
  switch (s.kind) {
  case SortKind::Bool:
    if (e.atom && e.text == "true")
      return 1;
    if (e.atom && e.text == "false")
      return 0;
    return bad();
  case SortKind::BV:
    if (e.atom && e.text.size() > 2 && e.text[0] == '#') {
      Word v = 0;
      unsigned base = e.text[1] == 'x' ? 16 : e.text[1] == 'b' ? 2 : 0;
      if (!base)
        return bad();
      for (std::size_t i = 2; i < e.text.size(); ++i) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(e.text[i])));
        unsigned d = std::isdigit(static_cast<unsigned char>(c)) ? unsigned(c - '0') : unsigned(c - 'a' + 10);
        if (d >= base)
          return bad();
        v = v * base + d;
      }
      return v;
    }
    if (!e.atom && e.list.size() == 3 && e.list[0].text == "_" && e.list[1].text.rfind("bv", 0) == 0) {
      if (auto w = parse_word(e.list[1].text.substr(2)))
        return *w;
    }
    return bad();
  case SortKind::Addr:
    if (e.atom) {
      if (auto a = model_.addrs.find(e.text))
        return *a;
    }
    return bad();
  case SortKind::Event:
    if (e.atom && e.text == "NoEvent")
      return 0;
    if (e.atom && e.text.rfind("ev_", 0) == 0) {
      if (auto t = model_.events.tag_of(e.text.substr(3)))
        return *t;
    }
    return bad();
  case SortKind::Fn:
    if (e.atom && e.text.rfind("fn_", 0) == 0) {
      if (auto i = model_.function_index(e.text.substr(3)))
        return *i;
      if (e.text == "fn_none")
        return 0;
    }
    return bad();
  }
  return bad();
}

void Context::dump(const std::string& text)
{
  if (opt_.dumpDir.empty())
    return;
  std::ostringstream name;
  name << opt_.dumpDir << "/" << name_ << "_" << std::setw(3) << std::setfill('0') << queries_ << ".smt2";
  std::ofstream out(name.str());
  out << text;
}

QueryResult Context::check(const std::vector<Term>& wanted)
{
  ++queries_;
  for (const auto& w : wanted) {
    if (w->op != Op::Var || w->input.kind != InputKind::Named)
      throw std::logic_error("only solver variables can be queried");
    declare(w->input, w->sort);
  }
  std::string tail = "(check-sat)\n";
  dump(script_ + tail);
  auto start = std::chrono::steady_clock::now();
  QueryResult r = opt_.incremental ? run_incremental(wanted) : run_fresh(wanted);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

QueryResult Context::talk(SolverProcess& p, const std::string& text, const std::vector<Term>& wanted,
                          SolverProcess::Clock::time_point deadline)
{
  QueryResult r;
  p.send(text, deadline);
  p.send("(check-sat)\n", deadline);
  for (;;) {
    auto resp = p.read_response(deadline);
    if (!resp) {
      p.kill();
      r.status = Status::Unknown;
      r.reason = "timeout";
      return r;
    }
    if (*resp == "sat") {
      r.status = Status::Sat;
      break;
    }
    if (*resp == "unsat") {
      r.status = Status::Unsat;
      return r;
    }
    if (*resp == "unknown") {
      r.status = Status::Unknown;
      p.send("(get-info :reason-unknown)\n", deadline);
      if (auto why = p.read_response(deadline))
        r.reason = *why;
      else
        r.reason = "unknown";
      return r;
    }
    if (resp->rfind("(error", 0) == 0)
      throw SolverProcessError("solver error: " + *resp);
    if (resp->empty() || *resp == "success")
      continue;
    throw SolverProcessError("unexpected solver output: " + *resp);
  }
  if (wanted.empty())
    return r;
  std::string req = "(get-value (";
  for (std::size_t i = 0; i < wanted.size(); ++i)
    req += (i ? " " : "") + symbol(wanted[i]->input.name);
  req += "))\n";
  p.send(req, deadline);
  auto resp = p.read_response(deadline);
  if (!resp) {
    p.kill();
    r.status = Status::Unknown;
    r.reason = "timeout";
    return r;
  }
  if (resp->rfind("(error", 0) == 0)
    throw SolverProcessError("solver error: " + *resp);
  SExpr e = parse_sexpr(*resp);
  std::map<std::string, const Sort*> sorts;
  for (const auto& w : wanted)
    sorts[w->input.name] = &w->sort;
  for (const auto& pair : e.list) {
    if (pair.atom || pair.list.size() != 2 || !pair.list[0].atom)
      throw SolverProcessError("malformed get-value response");
    std::string name = unquote(pair.list[0].text);
    auto it = sorts.find(name);
    if (it == sorts.end())
      throw SolverProcessError("solver returned an unrequested value '" + name + "'");
    r.values[name] = decode_value(pair.list[1], *it->second);
  }
  return r;
}

QueryResult Context::run_fresh(const std::vector<Term>& wanted)
{
  auto deadline = SolverProcess::Clock::now() + std::chrono::milliseconds(static_cast<long long>(opt_.timeoutSeconds * 1000));
  SolverProcess p(solverPath_, solverArgs_);
  QueryResult r = talk(p, script_, wanted, deadline);
  if (p.running()) {
    try {
      p.send("(exit)\n", deadline);
    } catch (const SolverProcessError&) {
    }
  }
  return r;
}

QueryResult Context::run_incremental(const std::vector<Term>& wanted)
{
  auto deadline = SolverProcess::Clock::now() + std::chrono::milliseconds(static_cast<long long>(opt_.timeoutSeconds * 1000));
  if (!live_ || !live_->running()) {
    live_ = std::make_unique<SolverProcess>(solverPath_, solverArgs_);
    sent_ = 0;
  }
  std::string pending = script_.substr(sent_);
  sent_ = script_.size();
  QueryResult r = talk(*live_, pending, wanted, deadline);
  if (!live_->running())
    live_.reset(); // a timeout killed it; the next check replays the whole script
  return r;
}

} // namespace solbmc::smt
