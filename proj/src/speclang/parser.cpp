#include "solbmc/speclang.hpp"

#include <cctype>
#include <set>

namespace solbmc::spec {

using frontend::ContractAst;
using frontend::SolType;
using frontend::TypeKind;

std::string_view kind_name(PropKind k)
{
  switch (k) {
  case PropKind::Invariant:
    return "invariant";
  case PropKind::Trace:
    return "trace";
  case PropKind::EventChain:
    return "events chaining";
  case PropKind::CallPossibility:
    return "call possibility";
  }
  return "?";
}

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceSpan span;
  bool lineStart = false;

  bool is(std::string_view s) const { return kind != Tok::End && text == s; }
};

struct Fail {
  Diagnostic diag;
};

std::vector<Token> tokenize(std::string_view src, std::vector<Diagnostic>& diags)
{
  std::vector<Token> out;
  std::size_t i = 0;
  unsigned line = 1, col = 1;
  bool lineStart = true;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
        lineStart = true;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n')
        advance(1);
      continue;
    }
    Token t;
    t.span = SourceSpan{i, i, line, col};
    t.lineStart = lineStart;
    lineStart = false;
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
        advance(1);
      t.kind = Tok::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < src.size() && std::isalnum(static_cast<unsigned char>(src[i])))
        advance(1);
      t.kind = Tok::Number;
    } else {
      static const char* two[] = {"&&", "||", "==", "!=", "<=", ">="};
      std::size_t len = 1;
      for (const char* op : two) {
        if (src.substr(i, 2) == op)
          len = 2;
      }
      if (len == 1 && std::string_view("()[],:.!<>+-*/%;").find(c) == std::string_view::npos) {
        diags.push_back({DiagKind::SyntaxError, 0, std::string("unexpected character '") + c + "'", t.span});
        advance(1);
        continue;
      }
      advance(len);
      t.kind = Tok::Punct;
    }
    t.text = std::string(src.substr(start, i - start));
    t.span.end = i;
    out.push_back(std::move(t));
  }
  Token end;
  end.span = SourceSpan{src.size(), src.size(), line, col};
  end.lineStart = true;
  out.push_back(end);
  return out;
}

bool starts_property(const Token& t)
{
  return t.is("property") || t.is("invariant") || t.is("trace") || t.is("chain") || (t.is("between") && t.lineStart);
}

PType ptype_of(const SolType& t)
{
  switch (t.kind) {
  case TypeKind::Bool:
    return PType::Bool;
  case TypeKind::Address:
    return PType::Addr;
  default:
    return PType::Uint;
  }
}

std::string ptype_name(PType t)
{
  switch (t) {
  case PType::Bool:
    return "bool";
  case PType::Addr:
    return "address";
  default:
    return "uint";
  }
}

class SpecParser {
public:
  SpecParser(std::vector<Token> toks, const ContractAst& ast, const model::ModelConfig& cfg)
      : toks_(std::move(toks)), ast_(ast), cfg_(cfg), addrs_(model::build_addr_domain(cfg))
  {
  }

  void run(SpecResult& out)
  {
    while (peek().kind != Tok::End) {
      if (accept(";"))
        continue;
      try {
        out.properties.push_back(property(out.properties.size() + 1));
      } catch (const Fail& f) {
        out.diagnostics.push_back(f.diag);
        advance();
        while (peek().kind != Tok::End && !(starts_property(peek()) && peek().lineStart))
          advance();
      }
    }
  }

private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& advance()
  {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size())
      ++pos_;
    return t;
  }
  bool accept(std::string_view s)
  {
    if (peek().is(s)) {
      advance();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg, DiagKind kind = DiagKind::SyntaxError) const
  {
    throw Fail{{kind, 0, msg, peek().span}};
  }
  [[noreturn]] void fail_at(const SourceSpan& span, const std::string& msg, DiagKind kind = DiagKind::TypeError) const
  {
    throw Fail{{kind, 0, msg, span}};
  }

  void expect(std::string_view s)
  {
    if (!accept(s))
      fail("expected '" + std::string(s) + "', found '" + (peek().kind == Tok::End ? "end of input" : peek().text) +
           "'");
  }

  std::string ident(const char* what)
  {
    if (peek().kind != Tok::Ident)
      fail(std::string("expected ") + what);
    return advance().text;
  }

  Word number_literal(const Token& t)
  {
    auto v = parse_word(t.text);
    if (!v)
      fail_at(t.span, "malformed number '" + t.text + "'", DiagKind::SyntaxError);
    if (*v > width_mask(cfg_.intWidth))
      fail_at(t.span, "literal " + t.text + " does not fit in " + std::to_string(cfg_.intWidth) + " bits");
    return *v;
  }

  // ---- properties ---------------------------------------------------------
  Property property(std::size_t index)
  {
    Property p;
    p.span = peek().span;
    if (accept("property")) {
      p.name = ident("property name");
      expect(":");
    } else {
      p.name = "p" + std::to_string(index);
    }
    prop_ = &p;
    sumVars_.clear();
    seenSumVars_.clear();
    callFn_ = nullptr;
    if (accept("invariant")) {
      p.kind = PropKind::Invariant;
      p.pred = bool_pred();
    } else if (accept("trace")) {
      p.kind = PropKind::Trace;
      if (accept("(")) {
        if (peek().kind != Tok::Number)
          fail("expected a trace length");
        Word k = number_literal(advance());
        if (k == 0 || k > 255)
          fail("trace length must be between 1 and 255");
        p.traceK = static_cast<unsigned>(k);
        expect(")");
      }
      p.pred = bool_pred();
    } else if (accept("chain")) {
      p.kind = PropKind::EventChain;
      expect("forbid");
      p.e3 = pattern();
      expect("between");
      p.e1 = pattern();
      expect("and");
      p.e2 = pattern();
      if (accept("where"))
        p.where = bool_pred();
    } else if (accept("between")) {
      p.kind = PropKind::CallPossibility;
      p.e1 = pattern();
      expect("and");
      p.e2 = pattern();
      expect("call");
      SourceSpan fspan = peek().span;
      p.fname = ident("function name");
      const auto* f = ast_.find_function(p.fname);
      if (!f || !f->is_public())
        fail_at(fspan, "unknown public function '" + p.fname + "'");
      callFn_ = f;
      expect("(");
      if (!peek().is(")")) {
        do {
          p.callArgs.push_back(pattern_arg(f->params.size() > p.callArgs.size() ? &f->params[p.callArgs.size()].type
                                                                                 : nullptr));
        } while (accept(","));
      }
      expect(")");
      if (p.callArgs.size() != f->params.size())
        fail_at(fspan, "function '" + p.fname + "' takes " + std::to_string(f->params.size()) + " arguments, " +
                           std::to_string(p.callArgs.size()) + " given");
      expect("is");
      if (accept("always"))
        p.always = true;
      else if (accept("never"))
        p.always = false;
      else
        fail("expected 'always' or 'never'");
      expect("possible");
      if (accept("where"))
        p.where = bool_pred();
    } else {
      fail("expected a property ('invariant', 'trace', 'chain' or 'between')");
    }
    accept(";");
    prop_ = nullptr;
    return p;
  }

  PatArg pattern_arg(const SolType* type)
  {
    PatArg a;
    const Token& t = peek();
    if (accept("_"))
      return a;
    if (t.kind == Tok::Number) {
      advance();
      a.kind = PatArg::Kind::Literal;
      a.value = number_literal(t);
      if (type && ptype_of(*type) != PType::Uint)
        fail_at(t.span, "number given for a " + ptype_name(ptype_of(*type)) + " argument");
      return a;
    }
    if (t.kind != Tok::Ident)
      fail("expected '_', a literal or a binder name");
    advance();
    if (t.text == "true" || t.text == "false") {
      if (type && ptype_of(*type) != PType::Bool)
        fail_at(t.span, "boolean given for a " + ptype_name(ptype_of(*type)) + " argument");
      a.kind = PatArg::Kind::Literal;
      a.value = t.text == "true" ? 1 : 0;
      return a;
    }
    if (auto ad = addrs_.find(t.text)) {
      if (type && ptype_of(*type) != PType::Addr)
        fail_at(t.span, "address given for a " + ptype_name(ptype_of(*type)) + " argument");
      a.kind = PatArg::Kind::Literal;
      a.value = *ad;
      return a;
    }
    a.kind = PatArg::Kind::Binder;
    a.name = t.text;
    if (type) {
      PType pt = ptype_of(*type);
      auto [it, fresh] = prop_->binders.emplace(a.name, pt);
      if (!fresh && it->second != pt)
        fail_at(t.span, "binder '" + a.name + "' used as " + ptype_name(it->second) + " and as " + ptype_name(pt));
    }
    return a;
  }

  EventPattern pattern()
  {
    EventPattern pat;
    pat.span = peek().span;
    pat.event = ident("event name");
    const auto* ev = ast_.find_event(pat.event);
    if (!ev)
      fail_at(pat.span, "unknown event '" + pat.event + "'");
    if (accept("(")) {
      if (!peek().is(")")) {
        do {
          const SolType* t = pat.args.size() < ev->params.size() ? &ev->params[pat.args.size()].type : nullptr;
          pat.args.push_back(pattern_arg(t));
        } while (accept(","));
      }
      expect(")");
      if (pat.args.size() != ev->params.size())
        fail_at(pat.span, "event '" + pat.event + "' has " + std::to_string(ev->params.size()) + " arguments, pattern has " +
                              std::to_string(pat.args.size()));
    } else {
      pat.args.resize(ev->params.size());
    }
    return pat;
  }

  // ---- predicates ---------------------------------------------------------
  PredPtr bool_pred()
  {
    PredPtr p = or_expr();
    if (p->type != PType::Bool)
      fail_at(p->span, "predicate must be boolean");
    return p;
  }

  PredPtr make(PKind kind, PType type, SourceSpan span, std::vector<PredPtr> args = {}, std::string op = {})
  {
    auto p = std::make_shared<Pred>();
    p->kind = kind;
    p->type = type;
    p->span = span;
    p->args = std::move(args);
    p->op = std::move(op);
    return p;
  }

  void require_type(const PredPtr& p, PType t, const std::string& op)
  {
    if (p->type != t)
      fail_at(p->span, "operator '" + op + "' expects " + ptype_name(t) + ", got " + ptype_name(p->type));
  }

  PredPtr or_expr()
  {
    PredPtr l = and_expr();
    while (peek().is("||")) {
      SourceSpan s = advance().span;
      PredPtr r = and_expr();
      require_type(l, PType::Bool, "||");
      require_type(r, PType::Bool, "||");
      l = make(PKind::Binary, PType::Bool, s, {l, r}, "||");
    }
    return l;
  }

  PredPtr and_expr()
  {
    PredPtr l = not_expr();
    while (peek().is("&&")) {
      SourceSpan s = advance().span;
      PredPtr r = not_expr();
      require_type(l, PType::Bool, "&&");
      require_type(r, PType::Bool, "&&");
      l = make(PKind::Binary, PType::Bool, s, {l, r}, "&&");
    }
    return l;
  }

  PredPtr not_expr()
  {
    if (peek().is("!")) {
      SourceSpan s = advance().span;
      PredPtr x = not_expr();
      require_type(x, PType::Bool, "!");
      return make(PKind::Unary, PType::Bool, s, {x}, "!");
    }
    return cmp_expr();
  }

  PredPtr cmp_expr()
  {
    PredPtr l = sum_expr();
    static const std::set<std::string> ops{"==", "!=", "<", "<=", ">", ">="};
    if (peek().kind == Tok::Punct && ops.count(peek().text)) {
      std::string op = peek().text;
      SourceSpan s = advance().span;
      PredPtr r = sum_expr();
      if (op == "==" || op == "!=") {
        if (l->type != r->type)
          fail_at(s, "cannot compare " + ptype_name(l->type) + " with " + ptype_name(r->type));
      } else {
        require_type(l, PType::Uint, op);
        require_type(r, PType::Uint, op);
      }
      return make(PKind::Binary, PType::Bool, s, {l, r}, op);
    }
    return l;
  }

  PredPtr sum_expr()
  {
    PredPtr l = mul_expr();
    while (peek().is("+") || peek().is("-")) {
      std::string op = peek().text;
      SourceSpan s = advance().span;
      PredPtr r = mul_expr();
      require_type(l, PType::Uint, op);
      require_type(r, PType::Uint, op);
      l = make(PKind::Binary, PType::Uint, s, {l, r}, op);
    }
    return l;
  }

  PredPtr mul_expr()
  {
    PredPtr l = unary_expr();
    while (peek().is("*") || peek().is("/") || peek().is("%")) {
      std::string op = peek().text;
      SourceSpan s = advance().span;
      PredPtr r = unary_expr();
      require_type(l, PType::Uint, op);
      require_type(r, PType::Uint, op);
      l = make(PKind::Binary, PType::Uint, s, {l, r}, op);
    }
    return l;
  }

  PredPtr unary_expr()
  {
    if (peek().is("-")) {
      SourceSpan s = advance().span;
      PredPtr x = unary_expr();
      require_type(x, PType::Uint, "-");
      return make(PKind::Unary, PType::Uint, s, {x}, "-");
    }
    if (peek().is("!")) {
      SourceSpan s = advance().span;
      PredPtr x = unary_expr();
      require_type(x, PType::Bool, "!");
      return make(PKind::Unary, PType::Bool, s, {x}, "!");
    }
    return primary();
  }

  PredPtr primary()
  {
    const Token& t = peek();
    SourceSpan s = t.span;
    if (accept("(")) {
      PredPtr p = or_expr();
      expect(")");
      return p;
    }
    if (t.kind == Tok::Number) {
      advance();
      auto p = make(PKind::Number, PType::Uint, s);
      std::const_pointer_cast<Pred>(p)->value = number_literal(t);
      return p;
    }
    if (t.kind != Tok::Ident)
      fail("expected an expression");
    std::string name = advance().text;
    if (name == "SUM")
      return sum(s);
    if (name == "true" || name == "false") {
      auto p = make(PKind::BoolLit, PType::Bool, s);
      std::const_pointer_cast<Pred>(p)->value = name == "true" ? 1 : 0;
      return p;
    }
    if (name == "msg" && peek().is(".")) {
      advance();
      std::string member = ident("'sender' or 'value'");
      if (!callFn_)
        fail_at(s, "msg." + member + " is only available in the where clause of a call possibility");
      if (member == "sender")
        return make(PKind::MsgSender, PType::Addr, s);
      if (member == "value")
        return make(PKind::MsgValue, PType::Uint, s);
      fail_at(s, "unknown member msg." + member);
    }
    if (peek().is(".")) {
      // Enum.Member
      const auto* en = ast_.find_enum(name);
      if (!en)
        fail_at(s, "unknown identifier '" + name + "'");
      advance();
      std::string member = ident("enum member");
      for (std::size_t i = 0; i < en->members.size(); ++i) {
        if (en->members[i] == member) {
          auto p = make(PKind::Number, PType::Uint, s);
          std::const_pointer_cast<Pred>(p)->value = i;
          return p;
        }
      }
      fail_at(s, "enum '" + name + "' has no member '" + member + "'");
    }
    for (auto it = sumVars_.rbegin(); it != sumVars_.rend(); ++it) {
      if (*it == name) {
        auto p = make(PKind::Binder, PType::Addr, s);
        std::const_pointer_cast<Pred>(p)->name = name;
        return p;
      }
    }
    if (auto b = prop_->binders.find(name); b != prop_->binders.end()) {
      auto p = make(PKind::Binder, b->second, s);
      std::const_pointer_cast<Pred>(p)->name = name;
      return p;
    }
    if (callFn_) {
      for (std::size_t i = 0; i < callFn_->params.size(); ++i) {
        if (callFn_->params[i].name == name) {
          auto p = make(PKind::Param, ptype_of(callFn_->params[i].type), s);
          std::const_pointer_cast<Pred>(p)->name = name;
          std::const_pointer_cast<Pred>(p)->value = i;
          return p;
        }
      }
    }
    if (const auto* v = ast_.find_state_var(name))
      return state_var(*v, s);
    if (auto a = addrs_.find(name)) {
      auto p = make(PKind::AddrLit, PType::Addr, s);
      std::const_pointer_cast<Pred>(p)->value = *a;
      return p;
    }
    if (name == "this") {
      auto p = make(PKind::AddrLit, PType::Addr, s);
      std::const_pointer_cast<Pred>(p)->value = addrs_.contract();
      return p;
    }
    if (name == "alive")
      return make(PKind::Alive, PType::Bool, s);
    if (name == "blocktime" || name == "now")
      return make(PKind::Blocktime, PType::Uint, s);
    if (name == "balance") {
      expect("[");
      PredPtr a = or_expr();
      if (a->type != PType::Addr)
        fail_at(a->span, "balance[] expects an address");
      expect("]");
      return make(PKind::Balance, PType::Uint, s, {a});
    }
    if (seenSumVars_.count(name))
      fail_at(s, "binder '" + name + "' used outside its scope");
    fail_at(s, "unknown identifier '" + name + "'");
  }

  PredPtr state_var(const frontend::VarDecl& v, SourceSpan s)
  {
    if (v.isConstant) {
      if (!v.initializer || v.initializer->kind != frontend::ExprKind::Number)
        fail_at(s, "constant '" + v.name + "' has no literal value");
      auto p = make(PKind::Number, ptype_of(v.type), s);
      std::const_pointer_cast<Pred>(p)->value = wrap(v.initializer->value, cfg_.intWidth);
      return p;
    }
    std::vector<PredPtr> idx;
    SolType t = v.type;
    while (accept("[")) {
      if (t.kind != TypeKind::Mapping && t.kind != TypeKind::StaticArray)
        fail_at(s, "'" + v.name + "' indexed too many times");
      PredPtr i = or_expr();
      PType want = t.kind == TypeKind::Mapping ? PType::Addr : PType::Uint;
      if (i->type != want)
        fail_at(i->span, "index of '" + v.name + "' must be " + ptype_name(want));
      expect("]");
      idx.push_back(i);
      SolType next = *t.elem;
      t = next;
    }
    if (!t.is_scalar())
      fail_at(s, "'" + v.name + "' is not a scalar; index it down to one value");
    auto p = make(PKind::StateVar, ptype_of(t), s, std::move(idx));
    std::const_pointer_cast<Pred>(p)->name = v.name;
    return p;
  }

  PredPtr sum(SourceSpan s)
  {
    std::string var = ident("summation variable");
    expect("in");
    bool userOnly = false;
    if (accept("UserAddr"))
      userOnly = true;
    else if (!accept("Addr"))
      fail("expected 'Addr' or 'UserAddr'");
    expect(":");
    sumVars_.push_back(var);
    seenSumVars_.insert(var);
    PredPtr body = sum_expr();
    sumVars_.pop_back();
    require_type(body, PType::Uint, "SUM");
    auto p = make(PKind::Sum, PType::Uint, s, {body});
    std::const_pointer_cast<Pred>(p)->name = var;
    std::const_pointer_cast<Pred>(p)->userOnly = userOnly;
    return p;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ContractAst& ast_;
  model::ModelConfig cfg_;
  model::AddrDomain addrs_;
  Property* prop_ = nullptr;
  std::vector<std::string> sumVars_;
  std::set<std::string> seenSumVars_;
  const frontend::FunDecl* callFn_ = nullptr;
};

} // namespace

SpecResult parse_spec(std::string_view text, const ContractAst& ast, const model::ModelConfig& cfg)
{
  SpecResult out;
  auto toks = tokenize(text, out.diagnostics);
  SpecParser p(std::move(toks), ast, cfg);
  p.run(out);
  std::set<std::string> names;
  for (const auto& prop : out.properties) {
    if (!names.insert(prop.name).second)
      out.diagnostics.push_back({DiagKind::TypeError, 0, "duplicate property name '" + prop.name + "'", prop.span});
  }
  return out;
}

} // namespace solbmc::spec
