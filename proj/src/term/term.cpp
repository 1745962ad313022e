#include "solbmc/term.hpp"

#include <boost/container_hash/hash.hpp>

#include <mutex>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace solbmc::term {

namespace {

std::size_t node_hash(const Node& n)
{
  std::size_t h = static_cast<std::size_t>(n.op);
  boost::hash_combine(h, static_cast<int>(n.sort.kind));
  boost::hash_combine(h, n.sort.width);
  for (const auto& k : n.kids)
    boost::hash_combine(h, k.get());
  boost::hash_combine(h, boost::multiprecision::hash_value(n.value));
  boost::hash_combine(h, static_cast<int>(n.input.kind));
  boost::hash_combine(h, n.input.index);
  boost::hash_combine(h, n.input.name);
  boost::hash_combine(h, n.p0);
  boost::hash_combine(h, n.p1);
  return h;
}

bool shallow_equal(const Node& a, const Node& b)
{
  return a.op == b.op && a.sort == b.sort && a.kids == b.kids && a.value == b.value && a.input == b.input &&
         a.p0 == b.p0 && a.p1 == b.p1;
}

class InternTable {
public:
  Term intern(Node n)
  {
    n.hash = node_hash(n);
    std::lock_guard<std::mutex> lock(mu_);
    auto range = table_.equal_range(n.hash);
    for (auto it = range.first; it != range.second; ++it) {
      if (auto t = it->second.lock(); t && shallow_equal(*t, n))
        return t;
    }
    auto t = std::make_shared<const Node>(std::move(n));
    table_.emplace(t->hash, t);
    if (table_.size() > purgeAt_) {
      for (auto it = table_.begin(); it != table_.end();) {
        if (it->second.expired())
          it = table_.erase(it);
        else
          ++it;
      }
      purgeAt_ = std::max<std::size_t>(1 << 16, table_.size() * 2);
    }
    return t;
  }

private:
  std::mutex mu_;
  std::unordered_multimap<std::size_t, std::weak_ptr<const Node>> table_;
  std::size_t purgeAt_ = 1 << 16;
};

InternTable& table()
{
  static InternTable t;
  return t;
}

Term make(Op op, Sort sort, std::vector<Term> kids, unsigned p0 = 0, unsigned p1 = 0)
{
  Node n;
  n.op = op;
  n.sort = sort;
  n.kids = std::move(kids);
  n.p0 = p0;
  n.p1 = p1;
  return table().intern(std::move(n));
}

void require_bv(const Term& a, const Term& b)
{
  if (a->sort.kind != SortKind::BV || !(a->sort == b->sort))
    throw std::logic_error("bit-vector operands of different sorts");
}

const Word& cval(const Term& t) { return t->value; }

bool is_zero(const Term& t) { return t->is_const() && t->value == 0; }
bool is_one(const Term& t) { return t->is_const() && t->value == 1; }

} // namespace

Term mk_const(const Word& v, Sort sort)
{
  Node n;
  n.op = Op::Const;
  n.sort = sort;
  n.value = sort.kind == SortKind::BV ? wrap(v, sort.width) : v;
  return table().intern(std::move(n));
}

Term mk_bool(bool b) { return mk_const(b ? 1 : 0, Sort::boolean()); }
Term mk_bv(const Word& v, unsigned width) { return mk_const(v, Sort::bv(width)); }
Term mk_addr(unsigned ordinal) { return mk_const(ordinal, Sort::addr()); }
Term mk_event(unsigned tag) { return mk_const(tag, Sort::event()); }
Term mk_fn(unsigned index) { return mk_const(index, Sort::fn()); }

Term mk_var(Input in, Sort sort)
{
  Node n;
  n.op = Op::Var;
  n.sort = sort;
  n.input = std::move(in);
  return table().intern(std::move(n));
}

Term mk_named(const std::string& name, Sort sort) { return mk_var(Input{InputKind::Named, 0, name}, sort); }

Term not_(const Term& a)
{
  if (a->is_const())
    return mk_bool(a->value == 0);
  if (a->op == Op::Not)
    return a->kids[0];
  return make(Op::Not, Sort::boolean(), {a});
}

namespace {

Term nary(Op op, std::vector<Term> xs)
{
  bool isAnd = op == Op::And;
  std::vector<Term> flat;
  std::unordered_set<const Node*> seen;
  std::vector<Term> stack(xs.rbegin(), xs.rend());
  while (!stack.empty()) {
    Term x = std::move(stack.back());
    stack.pop_back();
    if (x->op == op) {
      for (auto it = x->kids.rbegin(); it != x->kids.rend(); ++it)
        stack.push_back(*it);
      continue;
    }
    if (x->is_const()) {
      if ((x->value != 0) == isAnd)
        continue; // neutral element
      return mk_bool(!isAnd);
    }
    if (seen.insert(x.get()).second)
      flat.push_back(std::move(x));
  }
  for (const auto& x : flat) {
    if (x->op == Op::Not && seen.count(x->kids[0].get()))
      return mk_bool(!isAnd);
  }
  if (flat.empty())
    return mk_bool(isAnd);
  if (flat.size() == 1)
    return flat.front();
  return make(op, Sort::boolean(), std::move(flat));
}

} // namespace

Term and_(std::vector<Term> xs) { return nary(Op::And, std::move(xs)); }
Term and_(const Term& a, const Term& b) { return nary(Op::And, {a, b}); }
Term or_(std::vector<Term> xs) { return nary(Op::Or, std::move(xs)); }
Term or_(const Term& a, const Term& b) { return nary(Op::Or, {a, b}); }

Term implies(const Term& a, const Term& b)
{
  if (a->is_false() || b->is_true() || a == b)
    return mk_bool(true);
  if (a->is_true())
    return b;
  if (b->is_false())
    return not_(a);
  return make(Op::Implies, Sort::boolean(), {a, b});
}

Term ite(const Term& c, const Term& a, const Term& b)
{
  if (!(a->sort == b->sort))
    throw std::logic_error("ite branches of different sorts");
  if (c->is_true() || a == b)
    return a;
  if (c->is_false())
    return b;
  if (c->op == Op::Not)
    return ite(c->kids[0], b, a);
  if (a->op == Op::Ite && a->kids[0] == c)
    return ite(c, a->kids[1], b);
  if (b->op == Op::Ite && b->kids[0] == c)
    return ite(c, a, b->kids[2]);
  if (a->sort.kind == SortKind::Bool) {
    if (a->is_true())
      return or_(c, b);
    if (a->is_false())
      return and_(not_(c), b);
    if (b->is_false())
      return and_(c, a);
    if (b->is_true())
      return or_(not_(c), a);
  }
  return make(Op::Ite, a->sort, {c, a, b});
}

Term eq(const Term& a, const Term& b)
{
  if (!(a->sort == b->sort))
    throw std::logic_error("equality between different sorts");
  if (a == b)
    return mk_bool(true);
  if (a->is_const() && b->is_const())
    return mk_bool(a->value == b->value);
  if (a->sort.kind == SortKind::Bool) {
    if (a->is_const())
      return a->value != 0 ? b : not_(b);
    if (b->is_const())
      return b->value != 0 ? a : not_(a);
  }
  // push a comparison with a constant into an ite whose leaves are constants
  auto pushable = [](const Term& t) {
    return t->op == Op::Ite && t->kids[1]->is_const() && (t->kids[2]->is_const() || t->kids[2]->op == Op::Ite);
  };
  if (b->is_const() && pushable(a))
    return ite(a->kids[0], eq(a->kids[1], b), eq(a->kids[2], b));
  if (a->is_const() && pushable(b))
    return ite(b->kids[0], eq(a, b->kids[1]), eq(a, b->kids[2]));
  if (b->is_const())
    return make(Op::Eq, Sort::boolean(), {b, a});
  return make(Op::Eq, Sort::boolean(), {a, b});
}

Term add(const Term& a, const Term& b)
{
  require_bv(a, b);
  if (a->is_const() && b->is_const())
    return mk_bv(cval(a) + cval(b), a->sort.width);
  if (is_zero(a))
    return b;
  if (is_zero(b))
    return a;
  return make(Op::Add, a->sort, {a, b});
}

Term sub(const Term& a, const Term& b)
{
  require_bv(a, b);
  unsigned w = a->sort.width;
  if (a->is_const() && b->is_const())
    return mk_bv(cval(a) + (width_mask(w) - cval(b)) + 1, w);
  if (is_zero(b))
    return a;
  if (a == b)
    return mk_bv(0, w);
  return make(Op::Sub, a->sort, {a, b});
}

Term mul(const Term& a, const Term& b)
{
  require_bv(a, b);
  unsigned w = a->sort.width;
  if (a->is_const() && b->is_const())
    return mk_bv(Word(WideWord(cval(a)) * WideWord(cval(b)) & WideWord(width_mask(w))), w);
  if (is_zero(a) || is_zero(b))
    return mk_bv(0, w);
  if (is_one(a))
    return b;
  if (is_one(b))
    return a;
  return make(Op::Mul, a->sort, {a, b});
}

Term udiv(const Term& a, const Term& b)
{
  require_bv(a, b);
  unsigned w = a->sort.width;
  if (a->is_const() && b->is_const())
    return mk_bv(cval(b) == 0 ? width_mask(w) : cval(a) / cval(b), w);
  if (is_one(b))
    return a;
  return make(Op::Udiv, a->sort, {a, b});
}

Term urem(const Term& a, const Term& b)
{
  require_bv(a, b);
  unsigned w = a->sort.width;
  if (a->is_const() && b->is_const())
    return mk_bv(cval(b) == 0 ? cval(a) : cval(a) % cval(b), w);
  if (is_one(b))
    return mk_bv(0, w);
  return make(Op::Urem, a->sort, {a, b});
}

Term neg(const Term& a)
{
  if (a->sort.kind != SortKind::BV)
    throw std::logic_error("negation of a non-bit-vector");
  if (a->is_const())
    return mk_bv((width_mask(a->sort.width) - cval(a)) + 1, a->sort.width);
  if (a->op == Op::Neg)
    return a->kids[0];
  return make(Op::Neg, a->sort, {a});
}

Term ult(const Term& a, const Term& b)
{
  require_bv(a, b);
  if (a->is_const() && b->is_const())
    return mk_bool(cval(a) < cval(b));
  if (a == b || is_zero(b))
    return mk_bool(false);
  return make(Op::Ult, Sort::boolean(), {a, b});
}

Term ule(const Term& a, const Term& b)
{
  require_bv(a, b);
  if (a->is_const() && b->is_const())
    return mk_bool(cval(a) <= cval(b));
  if (a == b || is_zero(a))
    return mk_bool(true);
  return make(Op::Ule, Sort::boolean(), {a, b});
}

Term zext(const Term& a, unsigned extra)
{
  if (a->sort.kind != SortKind::BV)
    throw std::logic_error("zero extension of a non-bit-vector");
  if (extra == 0)
    return a;
  unsigned w = a->sort.width + extra;
  if (w > 2 * kMaxWidth)
    throw std::logic_error("bit-vector too wide");
  if (a->is_const())
    return mk_bv(cval(a), w);
  return make(Op::ZeroExt, Sort::bv(w), {a}, extra);
}

Term extract(const Term& a, unsigned hi, unsigned lo)
{
  if (a->sort.kind != SortKind::BV || hi < lo || hi >= a->sort.width)
    throw std::logic_error("bad extract");
  if (lo == 0 && hi + 1 == a->sort.width)
    return a;
  if (a->is_const())
    return mk_bv(Word((WideWord(cval(a)) >> lo) & WideWord(width_mask(hi - lo + 1))), hi - lo + 1);
  if (a->op == Op::ZeroExt && lo == 0 && hi + 1 == a->kids[0]->sort.width)
    return a->kids[0];
  return make(Op::Extract, Sort::bv(hi - lo + 1), {a}, hi, lo);
}

namespace {

Term rebuild(const Term& t, std::vector<Term> kids)
{
  switch (t->op) {
  case Op::Not:
    return not_(kids[0]);
  case Op::And:
    return and_(std::move(kids));
  case Op::Or:
    return or_(std::move(kids));
  case Op::Implies:
    return implies(kids[0], kids[1]);
  case Op::Ite:
    return ite(kids[0], kids[1], kids[2]);
  case Op::Eq:
    return eq(kids[0], kids[1]);
  case Op::Add:
    return add(kids[0], kids[1]);
  case Op::Sub:
    return sub(kids[0], kids[1]);
  case Op::Mul:
    return mul(kids[0], kids[1]);
  case Op::Udiv:
    return udiv(kids[0], kids[1]);
  case Op::Urem:
    return urem(kids[0], kids[1]);
  case Op::Neg:
    return neg(kids[0]);
  case Op::Ult:
    return ult(kids[0], kids[1]);
  case Op::Ule:
    return ule(kids[0], kids[1]);
  case Op::ZeroExt:
    return zext(kids[0], t->p0);
  case Op::Extract:
    return extract(kids[0], t->p0, t->p1);
  default:
    return t;
  }
}

} // namespace

Term Substituter::operator()(const Term& t)
{
  if (t->op == Op::Const)
    return t;
  if (auto it = memo_.find(t.get()); it != memo_.end())
    return it->second;
  Term r;
  if (t->op == Op::Var) {
    auto s = f_(t->input, t->sort);
    r = s ? *s : t;
    if (!(r->sort == t->sort))
      throw std::logic_error("substitution changes the sort of an input");
  } else {
    std::vector<Term> kids;
    kids.reserve(t->kids.size());
    bool changed = false;
    for (const auto& k : t->kids) {
      kids.push_back((*this)(k));
      changed = changed || kids.back() != k;
    }
    r = changed ? rebuild(t, std::move(kids)) : t;
  }
  memo_.emplace(t.get(), r);
  return r;
}

Term substitute(const Term& t, const Substitution& f)
{
  Substituter s(f);
  return s(t);
}

Word Evaluator::operator()(const Term& t)
{
  if (t->op == Op::Const)
    return t->value;
  if (auto it = memo_.find(t.get()); it != memo_.end())
    return it->second;
  auto k = [&](std::size_t i) { return (*this)(t->kids[i]); };
  unsigned w = t->sort.width;
  Word r = 0;
  switch (t->op) {
  case Op::Var:
    r = v_(t->input, t->sort);
    if (t->sort.kind == SortKind::BV)
      r = wrap(r, w);
    break;
  case Op::Not:
    r = k(0) == 0 ? 1 : 0;
    break;
  case Op::And:
    r = 1;
    for (std::size_t i = 0; i < t->kids.size() && r != 0; ++i)
      r = k(i) != 0 ? 1 : 0;
    break;
  case Op::Or:
    r = 0;
    for (std::size_t i = 0; i < t->kids.size() && r == 0; ++i)
      r = k(i) != 0 ? 1 : 0;
    break;
  case Op::Implies:
    r = (k(0) == 0 || k(1) != 0) ? 1 : 0;
    break;
  case Op::Ite:
    r = k(0) != 0 ? k(1) : k(2);
    break;
  case Op::Eq:
    r = k(0) == k(1) ? 1 : 0;
    break;
  case Op::Add:
    r = wrap(k(0) + k(1), w);
    break;
  case Op::Sub:
    r = wrap(k(0) + (width_mask(w) - k(1)) + 1, w);
    break;
  case Op::Mul:
    r = Word(WideWord(k(0)) * WideWord(k(1)) & WideWord(width_mask(w)));
    break;
  case Op::Udiv: {
    Word b = k(1);
    r = b == 0 ? width_mask(w) : k(0) / b;
    break;
  }
  case Op::Urem: {
    Word a = k(0), b = k(1);
    r = b == 0 ? a : a % b;
    break;
  }
  case Op::Neg:
    r = wrap((width_mask(w) - k(0)) + 1, w);
    break;
  case Op::Ult:
    r = k(0) < k(1) ? 1 : 0;
    break;
  case Op::Ule:
    r = k(0) <= k(1) ? 1 : 0;
    break;
  case Op::ZeroExt:
    r = k(0);
    break;
  case Op::Extract:
    r = Word((WideWord(k(0)) >> t->p1) & WideWord(width_mask(t->p0 - t->p1 + 1)));
    break;
  case Op::Const:
    break;
  }
  memo_.emplace(t.get(), r);
  return r;
}

Word eval(const Term& t, const Valuation& v)
{
  Evaluator e(v);
  return e(t);
}

std::vector<std::pair<Input, Sort>> free_inputs(const Term& t)
{
  std::vector<std::pair<Input, Sort>> out;
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{t.get()};
  std::vector<const Node*> order;
  // iterative DFS preserving left-to-right first occurrence
  std::function<void(const Node*)> visit = [&](const Node* n) {
    if (!seen.insert(n).second)
      return;
    if (n->op == Op::Var) {
      bool dup = false;
      for (const auto& [in, s] : out)
        dup = dup || in == n->input;
      if (!dup)
        out.emplace_back(n->input, n->sort);
    }
    for (const auto& k : n->kids)
      visit(k.get());
  };
  visit(t.get());
  return out;
}

std::size_t dag_size(const Term& t)
{
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{t.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second)
      continue;
    for (const auto& k : n->kids)
      stack.push_back(k.get());
  }
  return seen.size();
}

namespace {

const char* op_name(Op op)
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

void render(std::ostream& os, const Term& t, const std::function<std::string(const Input&)>& name)
{
  switch (t->op) {
  case Op::Const:
    switch (t->sort.kind) {
    case SortKind::Bool:
      os << (t->value != 0 ? "true" : "false");
      break;
    case SortKind::BV:
      os << "(_ bv" << t->value << " " << t->sort.width << ")";
      break;
    case SortKind::Addr:
      os << "(addr " << t->value << ")";
      break;
    case SortKind::Event:
      os << "(event " << t->value << ")";
      break;
    case SortKind::Fn:
      os << "(fn " << t->value << ")";
      break;
    }
    return;
  case Op::Var:
    os << name(t->input);
    return;
  case Op::ZeroExt:
    os << "((_ zero_extend " << t->p0 << ") ";
    render(os, t->kids[0], name);
    os << ")";
    return;
  case Op::Extract:
    os << "((_ extract " << t->p0 << " " << t->p1 << ") ";
    render(os, t->kids[0], name);
    os << ")";
    return;
  default:
    os << "(" << op_name(t->op);
    for (const auto& k : t->kids) {
      os << " ";
      render(os, k, name);
    }
    os << ")";
  }
}

} // namespace

std::string to_sexpr(const Term& t, const std::function<std::string(const Input&)>& name)
{
  std::ostringstream os;
  render(os, t, name);
  return os.str();
}

} // namespace solbmc::term
