#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nerh {

// Decoded code point plus how many bytes it consumed. Invalid UTF-8 bytes are
// mapped to themselves (latin-1 fallback) so scanning never gets stuck.
struct Utf8Char {
  char32_t cp = 0;
  std::size_t size = 1;
};

inline Utf8Char decode_utf8(std::string_view s, std::size_t pos) {
  unsigned char b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {b0, 1};
  }
  if (pos + len > s.size()) return {b0, 1};
  for (std::size_t i = 1; i < len; ++i) {
    unsigned char b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {b0, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

inline bool is_space_cp(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0x85 || c == 0xA0;
}

inline bool is_digit_cp(char32_t c) { return c >= U'0' && c <= U'9'; }

// Letters: ASCII plus Latin-1 supplement / Latin Extended / IPA, which covers
// the clinical Italian the harness is aimed at. Everything else non-ASCII is
// treated as punctuation (its own token).
inline bool is_letter_cp(char32_t c) {
  if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return true;
  if (c == 0xD7 || c == 0xF7) return false;  // multiplication/division signs
  return (c >= 0xC0 && c <= 0x24F) || (c >= 0x250 && c <= 0x2AF);
}

inline bool is_word_cp(char32_t c) { return is_letter_cp(c) || is_digit_cp(c); }

inline bool is_upper_cp(char32_t c) {
  if (c >= U'A' && c <= U'Z') return true;
  return c >= 0xC0 && c <= 0xDE && c != 0xD7;
}

// ASCII-lowercases a string and folds the Latin-1 uppercase range; adequate
// for gazetteer keys and window features over this corpus family.
inline std::string lower_copy(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    Utf8Char u = decode_utf8(s, i);
    char32_t c = u.cp;
    if (c >= U'A' && c <= U'Z') {
      out += static_cast<char>(c - U'A' + U'a');
    } else if (c >= 0xC0 && c <= 0xDE && c != 0xD7) {
      char32_t l = c + 0x20;
      out += static_cast<char>(0xC0 | (l >> 6));
      out += static_cast<char>(0x80 | (l & 0x3F));
    } else {
      out.append(s.substr(i, u.size));
    }
    i += u.size;
  }
  return out;
}

}  // namespace nerh
