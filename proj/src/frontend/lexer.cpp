#include "solbmc/lexer.hpp"

#include <array>
#include <cctype>

namespace solbmc::frontend {

namespace {

// Longest first so that maximal munch works with a linear scan.
constexpr std::array kPuncts = {
    ">>=", "<<=", "==>", "**", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=",
    "|=",  "&=",  "^=",  "++", "--", "=>", "<<", ">>", "(",  ")",  "{",  "}",  "[",  "]",  ";",
    ",",   ".",   "?",   ":",  "=",  "<",  ">",  "+",  "-",  "*",  "/",  "%",  "!",  "&",  "|",
    "^",   "~",
};

class Lexer {
public:
  Lexer(std::string_view src, bool hashComments) : src_(src), hash_comments_(hashComments) {}

  std::vector<Token> run()
  {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      if (pos_ >= src_.size()) {
        out.push_back(Token{TokKind::End, "", span_from(pos_)});
        break;
      }
      out.push_back(next());
    }
    return out;
  }

private:
  SourceSpan span_from(std::size_t begin) const
  {
    SourceSpan s;
    s.begin = begin;
    s.end = pos_;
    s.line = tok_line_;
    s.col = tok_col_;
    return s;
  }

  void advance()
  {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia()
  {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          advance();
      } else if (c == '#' && hash_comments_) {
        while (pos_ < src_.size() && src_[pos_] != '\n')
          advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        advance();
        advance();
        while (pos_ < src_.size() && !(src_[pos_] == '*' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/'))
          advance();
        if (pos_ < src_.size()) {
          advance();
          advance();
        }
      } else {
        break;
      }
    }
  }

  Token next()
  {
    std::size_t begin = pos_;
    tok_line_ = line_;
    tok_col_ = col_;
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' || src_[pos_] == '$'))
        advance();
      return {TokKind::Ident, std::string(src_.substr(begin, pos_ - begin)), span_from(begin)};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      if (c == '0' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
        advance();
        advance();
        while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_])))
          advance();
      } else {
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          advance();
      }
      return {TokKind::Number, std::string(src_.substr(begin, pos_ - begin)), span_from(begin)};
    }
    if (c == '"' || c == '\'') {
      char quote = c;
      advance();
      std::string text;
      while (pos_ < src_.size() && src_[pos_] != quote && src_[pos_] != '\n') {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size())
          advance();
        text.push_back(src_[pos_]);
        advance();
      }
      if (pos_ >= src_.size() || src_[pos_] != quote)
        return {TokKind::Error, "unterminated string literal", span_from(begin)};
      advance();
      return {TokKind::String, std::move(text), span_from(begin)};
    }
    for (std::string_view p : kPuncts) {
      if (src_.substr(pos_, p.size()) == p) {
        for (std::size_t i = 0; i < p.size(); ++i)
          advance();
        return {TokKind::Punct, std::string(p), span_from(begin)};
      }
    }
    advance();
    return {TokKind::Error, std::string("unexpected character '") + c + "'", span_from(begin)};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  unsigned line_ = 1;
  unsigned col_ = 1;
  unsigned tok_line_ = 1;
  unsigned tok_col_ = 1;
  bool hash_comments_;
};

} // namespace

std::vector<Token> tokenize(std::string_view source, bool hashComments)
{
  return Lexer(source, hashComments).run();
}

} // namespace solbmc::frontend
