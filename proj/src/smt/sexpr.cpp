#include "solbmc/sexpr.hpp"

#include <cctype>

namespace solbmc::smt {

std::string SExpr::str() const
{
  if (atom)
    return text;
  std::string out = "(";
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i)
      out += ' ';
    out += list[i].str();
  }
  return out + ")";
}

namespace {

class Reader {
public:
  explicit Reader(std::string_view s) : s_(s) {}

  void skip()
  {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n')
          ++pos_;
      } else {
        break;
      }
    }
  }

  bool done()
  {
    skip();
    return pos_ >= s_.size();
  }

  SExpr read(int depth = 0)
  {
    if (depth > 10000)
      throw SExprError("s-expression nested too deeply");
    skip();
    if (pos_ >= s_.size())
      throw SExprError("unexpected end of input");
    char c = s_[pos_];
    if (c == ')')
      throw SExprError("unbalanced ')'");
    if (c == '(') {
      ++pos_;
      SExpr e;
      e.atom = false;
      for (;;) {
        skip();
        if (pos_ >= s_.size())
          throw SExprError("unterminated list");
        if (s_[pos_] == ')') {
          ++pos_;
          return e;
        }
        e.list.push_back(read(depth + 1));
      }
    }
    std::size_t start = pos_;
    if (c == '|') {
      auto end = s_.find('|', pos_ + 1);
      if (end == std::string_view::npos)
        throw SExprError("unterminated quoted symbol");
      pos_ = end + 1;
    } else if (c == '"') {
      ++pos_;
      for (;;) {
        if (pos_ >= s_.size())
          throw SExprError("unterminated string");
        if (s_[pos_] == '"') {
          if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '"') {
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        ++pos_;
      }
    } else {
      while (pos_ < s_.size()) {
        char d = s_[pos_];
        if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';')
          break;
        ++pos_;
      }
    }
    SExpr e;
    e.text = std::string(s_.substr(start, pos_ - start));
    return e;
  }

private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

} // namespace

std::vector<SExpr> parse_sexprs(std::string_view text)
{
  Reader r(text);
  std::vector<SExpr> out;
  while (!r.done())
    out.push_back(r.read());
  return out;
}

SExpr parse_sexpr(std::string_view text)
{
  auto all = parse_sexprs(text);
  if (all.size() != 1)
    throw SExprError("expected one s-expression, found " + std::to_string(all.size()));
  return std::move(all.front());
}

bool complete_sexpr(std::string_view text)
{
  int depth = 0;
  bool seen = false;
  bool inBar = false, inString = false, inComment = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (inComment) {
      if (c == '\n')
        inComment = false;
      continue;
    }
    if (inBar) {
      if (c == '|')
        inBar = false;
      continue;
    }
    if (inString) {
      if (c == '"')
        inString = false;
      continue;
    }
    switch (c) {
    case ';':
      inComment = true;
      break;
    case '|':
      inBar = true;
      seen = true;
      break;
    case '"':
      inString = true;
      seen = true;
      break;
    case '(':
      ++depth;
      seen = true;
      break;
    case ')':
      --depth;
      if (depth == 0)
        return true;
      break;
    default:
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (seen && depth == 0)
          return true;
      } else {
        seen = true;
      }
    }
  }
  return false;
}

} // namespace solbmc::smt
