#include "solbmc/word.hpp"

#include <cctype>

namespace solbmc {

std::optional<Word> parse_word(std::string_view text)
{
  if (text.empty())
    return std::nullopt;
  WideWord acc = 0;
  const WideWord limit = WideWord(~Word(0));
  unsigned base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    text.remove_prefix(2);
  }
  for (char c : text) {
    unsigned digit = 0;
    if (std::isdigit(static_cast<unsigned char>(c)))
      digit = static_cast<unsigned>(c - '0');
    else if (base == 16 && std::isxdigit(static_cast<unsigned char>(c)))
      digit = static_cast<unsigned>(std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
    else
      return std::nullopt;
    if (digit >= base)
      return std::nullopt;
    acc = acc * base + digit;
    if (acc > limit)
      return std::nullopt;
  }
  return Word(acc);
}

} // namespace solbmc
