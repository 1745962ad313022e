#include "solbmc/frontend.hpp"
#include "solbmc/lexer.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace solbmc::frontend {

namespace {

struct SyntaxFailure {
  Diagnostic diag;
};

constexpr int kMaxDepth = 400;

const std::map<std::string, Word, std::less<>>& units()
{
  static const std::map<std::string, Word, std::less<>> table = {
      {"wei", Word(1)},
      {"szabo", Word("1000000000000")},
      {"finney", Word("1000000000000000")},
      {"ether", Word("1000000000000000000")},
      {"seconds", Word(1)},
      {"minutes", Word(60)},
      {"hours", Word(3600)},
      {"days", Word(86400)},
      {"weeks", Word(604800)},
      {"years", Word(31536000)},
  };
  return table;
}

bool is_elementary_type_name(std::string_view s)
{
  if (s == "uint" || s == "int" || s == "bool" || s == "address" || s == "string" || s == "bytes" ||
      s == "byte" || s == "var")
    return true;
  auto numeric_suffix = [&](std::string_view prefix) {
    if (s.size() <= prefix.size() || s.substr(0, prefix.size()) != prefix)
      return false;
    return std::all_of(s.begin() + prefix.size(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  };
  return numeric_suffix("uint") || numeric_suffix("int") || numeric_suffix("bytes");
}

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ContractAst parse_source_unit()
  {
    struct Def {
      OtherDefinition::Kind kind;
      ContractAst body;
    };
    std::vector<Def> defs;
    while (!at_end()) {
      if (peek().is("pragma")) {
        while (!at_end() && !peek().is(";"))
          advance();
        expect(";");
      } else if (peek().is("import")) {
        fail("imports are not supported");
      } else if (peek().is("contract") || peek().is("interface") || peek().is("library")) {
        auto kind = peek().is("contract")    ? OtherDefinition::Kind::Contract
                    : peek().is("interface") ? OtherDefinition::Kind::Interface
                                             : OtherDefinition::Kind::Library;
        defs.push_back({kind, parse_contract()});
      } else {
        fail("expected contract, interface or pragma");
      }
    }

    auto main = std::find_if(defs.begin(), defs.end(),
                             [](const Def& d) { return d.kind == OtherDefinition::Kind::Contract; });
    if (main == defs.end())
      fail_at(toks_.back().span, "no contract definition found");

    ContractAst result = std::move(main->body);
    for (auto& d : defs) {
      if (&d == &*main)
        continue;
      result.others.push_back({d.kind, d.body.name, d.body.span});
    }

    // Events declared by inherited interfaces are visible in the contract.
    std::set<std::string> visited;
    std::vector<std::string> pending = result.bases;
    while (!pending.empty()) {
      std::string base = pending.back();
      pending.pop_back();
      if (!visited.insert(base).second)
        continue;
      for (auto& d : defs) {
        if (d.kind != OtherDefinition::Kind::Interface || d.body.name != base)
          continue;
        for (auto& ev : d.body.events) {
          if (!result.find_event(ev.name))
            result.events.push_back(ev);
        }
        for (auto& en : d.body.enums) {
          if (!result.find_enum(en.name))
            result.enums.push_back(en);
        }
        pending.insert(pending.end(), d.body.bases.begin(), d.body.bases.end());
      }
    }
    return result;
  }

  [[noreturn]] void fail(const std::string& msg) { fail_at(peek().span, msg); }

  [[noreturn]] void fail_at(SourceSpan span, const std::string& msg)
  {
    throw SyntaxFailure{Diagnostic{DiagKind::SyntaxError, 0, msg, span}};
  }

private:
  // ---- token plumbing ----------------------------------------------------
  const Token& peek(std::size_t ahead = 0) const
  {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_end() const { return peek().kind == TokKind::End; }
  const Token& advance()
  {
    const Token& t = peek();
    if (t.kind == TokKind::Error)
      fail_at(t.span, t.text);
    if (pos_ < toks_.size() - 1)
      ++pos_;
    last_end_ = t.span.end;
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
  const Token& expect(std::string_view s)
  {
    if (!peek().is(s)) {
      std::string got = peek().kind == TokKind::End ? "end of input" : "'" + peek().text + "'";
      fail("expected '" + std::string(s) + "' but found " + got);
    }
    return advance();
  }
  std::string expect_ident()
  {
    if (peek().kind != TokKind::Ident)
      fail("expected identifier");
    return advance().text;
  }
  SourceSpan span_since(const SourceSpan& start) const
  {
    SourceSpan s = start;
    s.end = std::max(last_end_, start.begin);
    return s;
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser)
    {
      if (++p.depth_ > kMaxDepth)
        p.fail("nesting too deep");
    }
    ~DepthGuard() { --p.depth_; }
  };

  // ---- declarations ------------------------------------------------------
  ContractAst parse_contract()
  {
    SourceSpan start = peek().span;
    advance(); // contract / interface / library
    ContractAst c;
    c.name = expect_ident();
    if (accept("is")) {
      do {
        c.bases.push_back(expect_ident());
        if (peek().is("("))
          fail("base constructor arguments are not supported");
      } while (accept(","));
    }
    expect("{");
    while (!peek().is("}")) {
      if (at_end())
        fail("unterminated contract body");
      parse_member(c);
    }
    expect("}");
    c.span = span_since(start);
    return c;
  }

  void parse_member(ContractAst& c)
  {
    const Token& t = peek();
    if (t.is("event")) {
      SourceSpan start = t.span;
      advance();
      EventDecl ev;
      ev.name = expect_ident();
      ev.params = parse_params(true);
      accept("anonymous");
      expect(";");
      ev.span = span_since(start);
      c.events.push_back(std::move(ev));
    } else if (t.is("enum")) {
      SourceSpan start = t.span;
      advance();
      EnumDecl en;
      en.name = expect_ident();
      expect("{");
      if (!peek().is("}")) {
        do {
          en.members.push_back(expect_ident());
        } while (accept(","));
      }
      expect("}");
      en.span = span_since(start);
      c.enums.push_back(std::move(en));
    } else if (t.is("function") || t.is("constructor")) {
      FunDecl f = parse_function(c.name);
      if (f.isConstructor) {
        if (c.ctor)
          fail_at(f.span, "duplicate constructor");
        c.ctor = std::move(f);
      } else {
        c.functions.push_back(std::move(f));
      }
    } else if (t.is("struct")) {
      fail("struct declarations are not supported");
    } else if (t.is("modifier")) {
      fail("modifier declarations are not supported");
    } else if (t.is("using")) {
      fail("'using' directives are not supported");
    } else {
      SourceSpan start = t.span;
      VarDecl v;
      v.type = parse_type();
      for (;;) {
        if (accept("public") || accept("private") || accept("internal"))
          continue;
        if (accept("constant")) {
          v.isConstant = true;
          continue;
        }
        break;
      }
      v.name = expect_ident();
      if (accept("="))
        v.initializer = parse_expr();
      expect(";");
      v.span = span_since(start);
      c.stateVars.push_back(std::move(v));
    }
  }

  std::vector<Param> parse_params(bool allowIndexed)
  {
    std::vector<Param> params;
    expect("(");
    if (!peek().is(")")) {
      do {
        SourceSpan start = peek().span;
        Param p;
        p.type = parse_type();
        while (peek().is("memory") || peek().is("storage") || peek().is("calldata") ||
               (allowIndexed && peek().is("indexed")))
          advance();
        if (peek().kind == TokKind::Ident && !peek().is(",") && !peek().is(")"))
          p.name = advance().text;
        p.span = span_since(start);
        params.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    return params;
  }

  FunDecl parse_function(const std::string& contractName)
  {
    SourceSpan start = peek().span;
    FunDecl f;
    if (accept("constructor")) {
      f.isConstructor = true;
      f.name = "constructor";
    } else {
      expect("function");
      if (peek().kind == TokKind::Ident)
        f.name = advance().text;
      else
        fail("fallback functions are not supported");
      if (f.name == contractName)
        f.isConstructor = true;
    }
    f.params = parse_params(false);
    for (;;) {
      const Token& q = peek();
      if (q.is("public")) {
        f.visibility = Visibility::Public;
      } else if (q.is("external")) {
        f.visibility = Visibility::External;
      } else if (q.is("internal")) {
        f.visibility = Visibility::Internal;
      } else if (q.is("private")) {
        f.visibility = Visibility::Private;
      } else if (q.is("payable")) {
        f.payable = true;
      } else if (q.is("view") || q.is("pure") || q.is("constant")) {
        // no semantic effect in the model
      } else if (q.is("returns")) {
        advance();
        f.returns = parse_params(false);
        continue;
      } else if (q.kind == TokKind::Ident && !q.is("{")) {
        f.modifiers.push_back(q.text);
        advance();
        if (peek().is("(")) {
          advance();
          int depth = 1;
          while (depth > 0 && !at_end()) {
            if (peek().is("("))
              ++depth;
            else if (peek().is(")"))
              --depth;
            advance();
          }
        }
        continue;
      } else {
        break;
      }
      advance();
    }
    if (accept(";")) {
      f.span = span_since(start);
      return f;
    }
    f.body = parse_block();
    f.span = span_since(start);
    return f;
  }

  // ---- types -------------------------------------------------------------
  SolType parse_type()
  {
    SolType base;
    const Token& t = peek();
    if (t.is("mapping")) {
      advance();
      expect("(");
      SolType key = parse_type();
      expect("=>");
      SolType value = parse_type();
      expect(")");
      base = SolType::mapping(std::move(key), std::move(value));
    } else if (t.kind == TokKind::Ident && is_elementary_type_name(t.text)) {
      base = elementary(advance().text);
      if (base.kind == TypeKind::Address)
        accept("payable");
    } else if (t.kind == TokKind::Ident) {
      // enum or contract name; the type checker decides which
      base.kind = TypeKind::Enum;
      base.name = advance().text;
    } else {
      fail("expected type");
    }
    while (peek().is("[")) {
      advance();
      if (accept("]")) {
        SolType arr;
        arr.kind = TypeKind::DynamicArray;
        arr.elem = std::make_shared<const SolType>(std::move(base));
        base = std::move(arr);
        continue;
      }
      const Token& n = peek();
      if (n.kind != TokKind::Number)
        fail("array length must be a number literal");
      auto len = parse_word(n.text);
      if (!len || *len == 0 || *len > Word(1u << 20))
        fail("array length out of range");
      advance();
      expect("]");
      base = SolType::static_array(std::move(base), static_cast<std::uint64_t>(*len));
    }
    return base;
  }

  SolType elementary(const std::string& name)
  {
    auto suffix_bits = [&](std::size_t prefixLen, unsigned dflt) -> unsigned {
      if (name.size() == prefixLen)
        return dflt;
      return static_cast<unsigned>(std::stoul(name.substr(prefixLen)));
    };
    if (name == "bool")
      return SolType::boolean();
    if (name == "address")
      return SolType::address();
    if (name == "string")
      return {TypeKind::String, 0, {}, {}, {}, 0};
    if (name == "bytes")
      return {TypeKind::Bytes, 0, {}, {}, {}, 0};
    if (name == "byte")
      return {TypeKind::FixedBytes, 8, {}, {}, {}, 0};
    if (name == "var")
      return SolType::void_type();
    if (name.rfind("uint", 0) == 0)
      return SolType::uint(suffix_bits(4, 256));
    if (name.rfind("int", 0) == 0)
      return {TypeKind::Int, suffix_bits(3, 256), {}, {}, {}, 0};
    return {TypeKind::FixedBytes, suffix_bits(5, 32) * 8, {}, {}, {}, 0};
  }

  // ---- statements --------------------------------------------------------
  StmtPtr parse_block()
  {
    DepthGuard guard(*this);
    SourceSpan start = peek().span;
    expect("{");
    std::vector<StmtPtr> stmts;
    while (!peek().is("}")) {
      if (at_end())
        fail("unterminated block");
      stmts.push_back(parse_stmt());
    }
    expect("}");
    return make_block(span_since(start), std::move(stmts));
  }

  bool looks_like_declaration() const
  {
    const Token& t = peek();
    if (t.kind != TokKind::Ident || t.is("delete") || t.is("new") || t.is("true") || t.is("false"))
      return false;
    if (t.is("mapping") || (is_elementary_type_name(t.text) && !peek(1).is("(")))
      return true;
    // `Name ident`, `Name memory ident`, `Name[3] ident`
    const Token& n = peek(1);
    if (n.kind == TokKind::Ident && !n.is("is"))
      return true;
    if (n.is("[")) {
      // every bracket pair must be `[]` or `[N]`, and a name must follow
      std::size_t i = 1;
      while (peek(i).is("[")) {
        ++i;
        if (peek(i).kind == TokKind::Number)
          ++i;
        if (!peek(i).is("]"))
          return false;
        ++i;
      }
      return peek(i).kind == TokKind::Ident;
    }
    return false;
  }

  StmtPtr parse_stmt()
  {
    DepthGuard guard(*this);
    const Token& t = peek();
    SourceSpan start = t.span;
    if (t.is("{"))
      return parse_block();
    if (t.is("if")) {
      advance();
      auto s = make_stmt(StmtKind::If, start);
      expect("(");
      s->expr = parse_expr();
      expect(")");
      s->then = parse_stmt();
      if (accept("else"))
        s->els = parse_stmt();
      s->span = span_since(start);
      return s;
    }
    if (t.is("while")) {
      advance();
      auto s = make_stmt(StmtKind::While, start);
      expect("(");
      s->expr = parse_expr();
      expect(")");
      s->then = parse_stmt();
      s->span = span_since(start);
      return s;
    }
    if (t.is("do")) {
      advance();
      auto s = make_stmt(StmtKind::DoWhile, start);
      s->then = parse_stmt();
      expect("while");
      expect("(");
      s->expr = parse_expr();
      expect(")");
      expect(";");
      s->span = span_since(start);
      return s;
    }
    if (t.is("for")) {
      advance();
      auto s = make_stmt(StmtKind::For, start);
      expect("(");
      if (!accept(";"))
        s->init = parse_simple_stmt();
      if (!peek().is(";"))
        s->expr = parse_expr();
      expect(";");
      if (!peek().is(")"))
        s->post = parse_expr();
      expect(")");
      s->then = parse_stmt();
      s->span = span_since(start);
      return s;
    }
    if (t.is("return")) {
      advance();
      auto s = make_stmt(StmtKind::Return, start);
      if (!peek().is(";"))
        s->expr = parse_expr();
      expect(";");
      s->span = span_since(start);
      return s;
    }
    if (t.is("throw")) {
      advance();
      expect(";");
      return make_stmt(StmtKind::Throw, span_since(start));
    }
    if (t.is("break") || t.is("continue")) {
      auto s = make_stmt(t.is("break") ? StmtKind::Break : StmtKind::Continue, start);
      advance();
      expect(";");
      s->span = span_since(start);
      return s;
    }
    if (t.is("emit")) {
      advance();
      auto s = make_stmt(StmtKind::Emit, start);
      s->expr = parse_expr();
      if (s->expr->kind != ExprKind::Call)
        fail_at(s->expr->span, "emit expects an event invocation");
      expect(";");
      s->span = span_since(start);
      return s;
    }
    if (t.is("assembly"))
      fail("inline assembly is not supported");
    return parse_simple_stmt();
  }

  // declaration or expression statement, terminated by ';'
  StmtPtr parse_simple_stmt()
  {
    SourceSpan start = peek().span;
    if (peek().is("var")) {
      advance();
      auto s = make_stmt(StmtKind::VarDecl, start);
      s->isVar = true;
      if (peek().is("("))
        fail("tuple declarations are not supported");
      s->name = expect_ident();
      if (accept("="))
        s->expr = parse_expr();
      expect(";");
      s->span = span_since(start);
      return s;
    }
    if (looks_like_declaration()) {
      auto s = make_stmt(StmtKind::VarDecl, start);
      s->declType = parse_type();
      while (peek().is("memory") || peek().is("storage") || peek().is("calldata"))
        advance();
      s->name = expect_ident();
      if (accept("="))
        s->expr = parse_expr();
      expect(";");
      s->span = span_since(start);
      return s;
    }
    auto s = make_stmt(StmtKind::Expr, start);
    s->expr = parse_expr();
    expect(";");
    s->span = span_since(start);
    return s;
  }

  // ---- expressions -------------------------------------------------------
  ExprPtr parse_expr()
  {
    DepthGuard guard(*this);
    ExprPtr lhs = parse_ternary();
    static const std::set<std::string, std::less<>> assignOps = {"=",  "+=", "-=", "*=",  "/=",  "%=",
                                                                 "|=", "&=", "^=", "<<=", ">>="};
    if (peek().kind == TokKind::Punct && assignOps.count(peek().text)) {
      std::string op = advance().text;
      ExprPtr rhs = parse_expr();
      SourceSpan sp = lhs->span;
      return make_expr(ExprKind::Assign, span_since(sp), op, {lhs, rhs});
    }
    return lhs;
  }

  ExprPtr parse_ternary()
  {
    ExprPtr c = parse_binary(0);
    if (accept("?")) {
      ExprPtr a = parse_expr();
      expect(":");
      ExprPtr b = parse_expr();
      return make_expr(ExprKind::Ternary, span_since(c->span), "?", {c, a, b});
    }
    return c;
  }

  static int precedence(const Token& t)
  {
    if (t.kind != TokKind::Punct)
      return -1;
    static const std::map<std::string, int, std::less<>> prec = {
        {"||", 1}, {"&&", 2}, {"==", 3}, {"!=", 3}, {"<", 4},  {">", 4},  {"<=", 4}, {">=", 4},
        {"|", 5},  {"^", 6},  {"&", 7},  {"<<", 8}, {">>", 8}, {"+", 9},  {"-", 9},  {"*", 10},
        {"/", 10}, {"%", 10}, {"**", 11},
    };
    auto it = prec.find(t.text);
    return it == prec.end() ? -1 : it->second;
  }

  ExprPtr parse_binary(int minPrec)
  {
    DepthGuard guard(*this);
    ExprPtr lhs = parse_unary();
    for (;;) {
      int p = precedence(peek());
      if (p < 0 || p < minPrec)
        break;
      std::string op = advance().text;
      // ** is right associative
      ExprPtr rhs = parse_binary(op == "**" ? p : p + 1);
      lhs = make_expr(ExprKind::Binary, span_since(lhs->span), op, {lhs, rhs});
    }
    return lhs;
  }

  ExprPtr parse_unary()
  {
    DepthGuard guard(*this);
    const Token& t = peek();
    if (t.is("!") || t.is("-") || t.is("~") || t.is("++") || t.is("--") || t.is("delete")) {
      SourceSpan start = t.span;
      std::string op = advance().text;
      ExprPtr operand = parse_unary();
      return make_expr(ExprKind::Unary, span_since(start), op, {operand});
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix()
  {
    ExprPtr e = parse_primary();
    for (;;) {
      if (peek().is(".")) {
        advance();
        std::string member = expect_ident();
        e = make_expr(ExprKind::Member, span_since(e->span), member, {e});
      } else if (peek().is("[")) {
        advance();
        if (peek().is("]"))
          fail("index expression expected");
        ExprPtr idx = parse_expr();
        expect("]");
        e = make_expr(ExprKind::Index, span_since(e->span), "", {e, idx});
      } else if (peek().is("(")) {
        advance();
        std::vector<ExprPtr> args{e};
        if (!peek().is(")")) {
          if (peek().is("{"))
            fail("named call arguments are not supported");
          do {
            args.push_back(parse_expr());
          } while (accept(","));
        }
        expect(")");
        e = make_expr(ExprKind::Call, span_since(e->span), "", std::move(args));
      } else if (peek().is("++") || peek().is("--")) {
        std::string op = advance().text;
        auto u = make_expr(ExprKind::Unary, span_since(e->span), op, {e});
        u->postfix = true;
        e = u;
      } else {
        break;
      }
    }
    return e;
  }

  ExprPtr parse_primary()
  {
    DepthGuard guard(*this);
    const Token& t = peek();
    SourceSpan start = t.span;
    if (t.kind == TokKind::Number) {
      std::string text = advance().text;
      std::string digits;
      std::copy_if(text.begin(), text.end(), std::back_inserter(digits), [](char c) { return c != '_'; });
      auto v = parse_word(digits);
      if (!v)
        fail_at(start, "number literal out of range");
      auto e = make_expr(ExprKind::Number, start, text);
      e->value = *v;
      if (peek().kind == TokKind::Ident) {
        auto it = units().find(peek().text);
        if (it != units().end()) {
          WideWord scaled = WideWord(*v) * WideWord(it->second);
          if (scaled > WideWord(~Word(0)))
            fail_at(start, "number literal out of range");
          e->value = Word(scaled);
          e->unit = advance().text;
        }
      }
      e->span = span_since(start);
      return e;
    }
    if (t.kind == TokKind::String) {
      return make_expr(ExprKind::StringLit, start, advance().text);
    }
    if (t.is("true") || t.is("false")) {
      return make_expr(ExprKind::BoolLit, start, advance().text);
    }
    if (t.is("(")) {
      advance();
      ExprPtr inner = parse_expr();
      if (peek().is(","))
        fail("tuple expressions are not supported");
      expect(")");
      return inner;
    }
    if (t.is("new")) {
      advance();
      auto e = make_expr(ExprKind::New, start);
      e->convType = parse_type();
      expect("(");
      if (!peek().is(")")) {
        do {
          e->args.push_back(parse_expr());
        } while (accept(","));
      }
      expect(")");
      e->span = span_since(start);
      return e;
    }
    if (t.kind == TokKind::Ident) {
      if (is_elementary_type_name(t.text) && t.text != "var" && peek(1).is("(")) {
        auto e = make_expr(ExprKind::TypeConv, start, t.text);
        e->convType = elementary(advance().text);
        advance(); // (
        e->args.push_back(parse_expr());
        expect(")");
        e->span = span_since(start);
        return e;
      }
      return make_expr(ExprKind::Ident, start, advance().text);
    }
    if (t.kind == TokKind::Error)
      fail_at(t.span, t.text);
    fail(t.kind == TokKind::End ? "unexpected end of input" : "unexpected token '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
  int depth_ = 0;
};

} // namespace

ParseResult parse_syntax(std::string_view source)
{
  ParseResult result;
  try {
    Parser parser(tokenize(source));
    result.ast = parser.parse_source_unit();
  } catch (const SyntaxFailure& f) {
    result.diagnostics.push_back(f.diag);
  }
  return result;
}

ParseResult parse(std::string_view source)
{
  ParseResult result = parse_syntax(source);
  if (!result.ast)
    return result;
  auto typeDiags = typecheck(*result.ast);
  result.diagnostics.insert(result.diagnostics.end(), typeDiags.begin(), typeDiags.end());
  auto subset = validate_subset(*result.ast);
  result.diagnostics.insert(result.diagnostics.end(), subset.begin(), subset.end());
  if (subset.empty() && !has_errors(typeDiags)) {
    auto ctor = validate_constructor(*result.ast);
    result.diagnostics.insert(result.diagnostics.end(), ctor.begin(), ctor.end());
  }
  std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(),
                   [](const Diagnostic& a, const Diagnostic& b) { return a.span.begin < b.span.begin; });
  return result;
}

} // namespace solbmc::frontend
