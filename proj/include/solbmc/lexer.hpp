#pragma once

#include "solbmc/diagnostics.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace solbmc::frontend {

enum class TokKind { Ident, Number, String, Punct, End, Error };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  SourceSpan span;

  bool is(std::string_view s) const { return (kind == TokKind::Punct || kind == TokKind::Ident) && text == s; }
};

/// Tokenizes Solidity-like source (also used for the property language).
/// Never throws: malformed input produces Error tokens. With `hashComments`
/// a `#` starts a line comment.
std::vector<Token> tokenize(std::string_view source, bool hashComments = false);

} // namespace solbmc::frontend
