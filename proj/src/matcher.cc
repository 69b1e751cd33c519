#include "wsner/matcher.h"

#include "wsner/text.h"

namespace wsner {

bool is_abbreviation(std::string_view term) {
  size_t visible = 0;
  bool letter = false, lower = false;
  for (size_t i = 0; i < term.size(); ++i) {
    const char c = term[i];
    if (text::is_space(c)) continue;
    ++visible;
    if (text::is_alpha(c)) letter = true;
    if (text::is_lower(c)) lower = true;
    if (c == '.' && i > 0 && i + 1 < term.size() && text::is_alpha(term[i - 1]) &&
        text::is_alpha(term[i + 1]))
      return true;
  }
  return letter && !lower && visible <= 5;
}

std::string normalize_case(std::string_view term) {
  return is_abbreviation(term) ? std::string(term) : text::lower(term);
}

std::string window_key(std::span<const Token> tokens) {
  std::string joined;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) joined += ' ';
    joined += tokens[i].text;
  }
  return normalize_case(joined);
}

std::string term_key(std::string_view term) {
  std::vector<Token> flat;
  for (auto& s : tokenize(term))
    for (auto& t : s.tokens) flat.push_back(std::move(t));
  return window_key(flat);
}

size_t term_token_length(std::string_view term) {
  size_t n = 0;
  for (const auto& s : tokenize(term)) n += s.tokens.size();
  return n;
}

}  // namespace wsner
