#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace solbmc {

/// Machine word of the model. Every uint value is kept reduced modulo 2^W,
/// where W is the configured integer width (at most 256).
using Word = boost::multiprecision::uint256_t;
using WideWord = boost::multiprecision::uint512_t;

constexpr unsigned kMaxWidth = 256;

inline Word width_mask(unsigned width)
{
  if (width >= kMaxWidth)
    return ~Word(0);
  return (Word(1) << width) - 1;
}

inline Word wrap(const Word& w, unsigned width) { return w & width_mask(width); }

inline std::string to_string(const Word& w) { return w.str(); }

/// Accepts decimal or 0x-prefixed hexadecimal. Values wider than 256 bits
/// are rejected.
std::optional<Word> parse_word(std::string_view text);

} // namespace solbmc
