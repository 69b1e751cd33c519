#ifndef WSNER_MATCHER_H_
#define WSNER_MATCHER_H_

#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wsner/corpus.h"

namespace wsner {

// Letter-case normalization shared by dictionary preprocessing and matching.
// Abbreviations (all-uppercase with at most 5 non-space characters, or with a
// period between two letters) are kept verbatim; everything else is
// lowercased.
bool is_abbreviation(std::string_view term);
std::string normalize_case(std::string_view term);

// Canonical lookup key of a term: its tokens (as produced by tokenize) joined
// by single spaces, then case-normalized. Matching a token window uses the
// same function, so "Tylenol (Acetaminophen)" and the tokens
// ["Tylenol","(","Acetaminophen",")"] share the key "tylenol ( acetaminophen )".
std::string term_key(std::string_view term);
std::string window_key(std::span<const Token> tokens);
size_t term_token_length(std::string_view term);

struct Match {
  size_t begin = 0;  // token index, inclusive
  size_t end = 0;    // exclusive
  const std::string* key = nullptr;
};

// Greedy left-to-right longest match over a key set. Returned spans never
// overlap.
template <typename Value>
class DictionaryMatcher {
 public:
  DictionaryMatcher() = default;

  void insert(std::string key, Value value, size_t token_length) {
    if (token_length > max_len_) max_len_ = token_length;
    entries_.insert_or_assign(std::move(key), std::move(value));
  }

  const Value* find(std::string_view key) const {
    auto it = entries_.find(std::string(key));
    return it == entries_.end() ? nullptr : &it->second;
  }

  // Longest entry starting at token `begin`; end == begin when none.
  Match longest_at(std::span<const Token> tokens, size_t begin) const {
    const size_t limit = std::min(max_len_, tokens.size() - begin);
    for (size_t n = limit; n >= 1; --n) {
      const std::string key = window_key(tokens.subspan(begin, n));
      auto it = entries_.find(key);
      if (it != entries_.end()) return {begin, begin + n, &it->first};
    }
    return {begin, begin, nullptr};
  }

  std::vector<Match> longest_matches(std::span<const Token> tokens) const {
    std::vector<Match> out;
    size_t i = 0;
    while (i < tokens.size()) {
      Match m = longest_at(tokens, i);
      if (m.end > m.begin) {
        out.push_back(m);
        i = m.end;
      } else {
        ++i;
      }
    }
    return out;
  }

  size_t max_token_length() const { return max_len_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::unordered_map<std::string, Value>& entries() const { return entries_; }

 private:
  std::unordered_map<std::string, Value> entries_;
  size_t max_len_ = 0;
};

// Key set with no payload.
using TermSet = DictionaryMatcher<char>;

}  // namespace wsner

#endif  // WSNER_MATCHER_H_
