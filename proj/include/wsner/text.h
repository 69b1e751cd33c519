#ifndef WSNER_TEXT_H_
#define WSNER_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

// Byte-level string helpers. Text is UTF-8; bytes >= 0x80 are treated as
// word characters and are never case-folded.
namespace wsner::text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_alpha(char c) { return is_upper(c) || is_lower(c); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }
// ASCII punctuation only.
inline bool is_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}
inline char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// True when every byte is ASCII punctuation (and s is non-empty).
bool all_punct(std::string_view s);
// Pure numbers: digits with optional sign, decimal point, thousands separators,
// or a trailing percent sign. "2", "3.5", "1,000", "-4" are numbers.
bool is_number(std::string_view s);
// Number of UTF-8 code points.
size_t codepoint_length(std::string_view s);

}  // namespace wsner::text

#endif  // WSNER_TEXT_H_
