// Synonym-set labeling and Schwartz-Hearst abbreviation definitions.

#include <algorithm>
#include <map>

#include "labelers_internal.h"
#include "wsner/text.h"

namespace wsner {

std::map<std::string, int> synset_classes(const SynsetIndex& syn, const TermClassMap& tcm) {
  std::map<std::string, int> out;
  for (const auto& [id, members] : syn.synsets) {
    ClassVector sum;
    for (const auto& key : members) {
      const ClassVector* v = tcm.find(key);
      if (!v) continue;
      if (sum.empty()) sum.assign(v->size(), 0.0);
      for (size_t c = 0; c < v->size(); ++c) sum[c] += (*v)[c];
    }
    if (sum.empty()) continue;
    const int cls = argmax_or_abstain(sum);
    if (cls != kAbstain) out.emplace(id, cls);
  }
  return out;
}

namespace {

bool has_letter(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return text::is_alpha(c); });
}
bool has_capital(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return text::is_upper(c); });
}
bool alnum_or_multibyte(char c) { return text::is_alnum(c) || static_cast<unsigned char>(c) >= 0x80; }

bool valid_short_form(std::string_view s) {
  return !s.empty() && has_letter(s) && (alnum_or_multibyte(s[0]) || s[0] == '(');
}

size_t count_words(std::string_view s, std::string_view separators) {
  size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    const bool sep = separators.find(c) != std::string_view::npos;
    if (!sep && !in_word) ++n;
    in_word = !sep;
  }
  return n;
}

// Token index range [b, e) of `sentence` lying inside absolute chars [cb, ce).
std::pair<size_t, size_t> tokens_within(const Sentence& sentence, size_t cb, size_t ce) {
  size_t b = sentence.tokens.size(), e = 0;
  for (size_t t = 0; t < sentence.tokens.size(); ++t) {
    const Token& tok = sentence.tokens[t];
    if (tok.char_end > cb && tok.char_start < ce) {
      b = std::min(b, t);
      e = t + 1;
    }
  }
  return {b, e};
}

}  // namespace

std::optional<std::string> find_best_long_form(std::string_view short_form,
                                               std::string_view long_form) {
  auto lower = [](char c) { return text::to_lower(c); };
  std::ptrdiff_t s = static_cast<std::ptrdiff_t>(short_form.size()) - 1;
  std::ptrdiff_t l = static_cast<std::ptrdiff_t>(long_form.size()) - 1;
  for (; s >= 0; --s) {
    const char cur = lower(short_form[static_cast<size_t>(s)]);
    if (!alnum_or_multibyte(cur)) continue;
    while ((l >= 0 && lower(long_form[static_cast<size_t>(l)]) != cur) ||
           (s == 0 && l > 0 && alnum_or_multibyte(long_form[static_cast<size_t>(l - 1)])))
      --l;
    if (l < 0) return std::nullopt;
    --l;
  }
  // Back up to the start of the word holding the first aligned character.
  size_t start = 0;
  if (l >= 0) {
    const auto space = long_form.rfind(' ', static_cast<size_t>(l));
    start = space == std::string_view::npos ? 0 : space + 1;
  }
  return std::string(long_form.substr(start));
}

bool accept_abbreviation(std::string_view short_form, std::string_view best) {
  if (short_form.size() < 2) return false;
  const size_t long_words = count_words(best, " \t\n\r\f-");
  size_t short_chars = 0;
  for (char c : short_form)
    if (alnum_or_multibyte(c)) ++short_chars;
  const std::string sf(short_form);
  if (best.size() < short_form.size()) return false;
  if (best.find(sf + " ") != std::string_view::npos) return false;
  if (best.size() >= sf.size() && best.substr(best.size() - sf.size()) == sf) return false;
  if (long_words > short_chars * 2) return false;
  if (long_words > short_chars + 5) return false;
  if (short_chars > 10) return false;
  return true;
}

std::vector<AbbreviationPair> find_abbreviations(const Document& doc) {
  std::vector<AbbreviationPair> out;
  for (size_t si = 0; si < doc.sentences.size(); ++si) {
    const Sentence& sent = doc.sentences[si];
    const auto& toks = sent.tokens;
    for (size_t open = 0; open < toks.size(); ++open) {
      if (toks[open].text != "(") continue;
      size_t close = open + 1;
      while (close < toks.size() && toks[close].text != ")" && toks[close].text != "(") ++close;
      if (close >= toks.size() || toks[close].text != ")" || close == open + 1 || open == 0) continue;

      const size_t sent_start = toks.front().char_start;
      const size_t inner_start = toks[open + 1].char_start;
      size_t inner_end = toks[close - 1].char_end;
      std::string_view inner = std::string_view(doc.text).substr(inner_start, inner_end - inner_start);
      for (std::string_view cut : {", ", "; "}) {
        const auto p = inner.find(cut);
        if (p != std::string_view::npos) {
          inner = inner.substr(0, p);
          inner_end = inner_start + p;
        }
      }
      std::string_view before = text::trim(
          std::string_view(doc.text).substr(sent_start, toks[open].char_start - sent_start));
      if (inner.size() <= 1 || before.size() <= 1) continue;

      AbbreviationPair pair;
      if (count_words(inner, " \t\n\r\f") > 2 || inner.size() > before.size()) {
        // "SF (long form)": the short form is the last word before the paren.
        const auto space = before.rfind(' ');
        const std::string_view sf = space == std::string_view::npos ? before : before.substr(space + 1);
        if (!has_capital(sf) || !valid_short_form(sf)) continue;
        auto best = find_best_long_form(sf, inner);
        if (!best || !accept_abbreviation(sf, *best)) continue;
        const size_t sf_start = static_cast<size_t>(sf.data() - doc.text.data());
        const auto [sb, se] = tokens_within(sent, sf_start, sf_start + sf.size());
        const size_t lf_start = inner_end - best->size();
        const auto [lb, le] = tokens_within(sent, lf_start, inner_end);
        pair = {{si, sb, se}, {si, lb, le}, std::string(sf), *best};
      } else {
        if (!valid_short_form(inner)) continue;
        auto best = find_best_long_form(inner, before);
        if (!best || !accept_abbreviation(inner, *best)) continue;
        const size_t before_end = static_cast<size_t>(before.data() - doc.text.data()) + before.size();
        const auto [lb, le] = tokens_within(sent, before_end - best->size(), before_end);
        const auto [sb, se] = tokens_within(sent, inner_start, inner_end);
        pair = {{si, sb, se}, {si, lb, le}, std::string(inner), *best};
      }
      if (pair.short_form.begin < pair.short_form.end && pair.long_form.begin < pair.long_form.end)
        out.push_back(std::move(pair));
    }
  }
  return out;
}

namespace internal {

SynsetLabeler::SynsetLabeler(std::shared_ptr<const SynsetIndex> syn,
                             std::shared_ptr<const TermClassMap> tcm)
    : syn_(std::move(syn)), tcm_(std::move(tcm)), classes_(synset_classes(*syn_, *tcm_)) {
  for (const auto& [key, _] : syn_->term_ids)
    members_.insert(key, 0, static_cast<size_t>(std::count(key.begin(), key.end(), ' ')) + 1);
}

namespace {

// Merges a vote into a token slot; disagreeing votes collapse to a conflict.
constexpr int kConflict = -2;
void merge_vote(int& slot, int cls) {
  if (slot == kAbstain)
    slot = cls;
  else if (slot != cls)
    slot = kConflict;
}

DocumentVotes finalize(DocumentVotes votes) {
  for (auto& s : votes)
    for (int& v : s)
      if (v == kConflict) v = kAbstain;
  return votes;
}

DocumentVotes empty_votes(const Document& doc) {
  DocumentVotes votes(doc.sentences.size());
  for (size_t s = 0; s < doc.sentences.size(); ++s)
    votes[s].assign(doc.sentences[s].tokens.size(), kAbstain);
  return votes;
}

}  // namespace

DocumentVotes SynsetLabeler::apply_any_pair(const Document& doc) const {
  struct Occurrence {
    size_t sentence, begin, end;
    const std::string* key;
  };
  std::vector<Occurrence> occurrences;
  std::map<std::string, std::set<std::string>> found;  // synset id -> distinct member keys
  for (size_t s = 0; s < doc.sentences.size(); ++s)
    for (const Match& m : members_.longest_matches(doc.sentences[s].tokens)) {
      occurrences.push_back({s, m.begin, m.end, m.key});
      for (const auto& id : syn_->term_ids.at(*m.key)) found[id].insert(*m.key);
    }

  DocumentVotes votes = empty_votes(doc);
  for (const auto& occ : occurrences) {
    for (const auto& id : syn_->term_ids.at(*occ.key)) {
      auto f = found.find(id);
      if (f == found.end() || f->second.size() < 2) continue;
      auto c = classes_.find(id);
      if (c == classes_.end()) continue;
      for (size_t t = occ.begin; t < occ.end; ++t) merge_vote(votes[occ.sentence][t], c->second);
    }
  }
  return finalize(std::move(votes));
}

DocumentVotes SynsetLabeler::apply_schwartz_hearst(const Document& doc) const {
  DocumentVotes votes = empty_votes(doc);
  std::map<std::string, int> short_classes;  // short-form key -> class (kConflict on disagreement)
  std::map<std::string, size_t> short_lengths;
  for (const auto& pair : find_abbreviations(doc)) {
    const auto& toks = doc.sentences[pair.long_form.sentence].tokens;
    const std::span<const Token> lf(toks.data() + pair.long_form.begin,
                                    pair.long_form.end - pair.long_form.begin);
    const ClassVector* v = tcm_->find(window_key(lf));
    if (!v) continue;
    const int cls = argmax_or_abstain(*v);
    if (cls == kAbstain) continue;
    for (size_t t = pair.long_form.begin; t < pair.long_form.end; ++t)
      merge_vote(votes[pair.long_form.sentence][t], cls);
    const std::span<const Token> sf(toks.data() + pair.short_form.begin,
                                    pair.short_form.end - pair.short_form.begin);
    const std::string key = window_key(sf);
    auto [it, inserted] = short_classes.emplace(key, cls);
    if (!inserted && it->second != cls) it->second = kConflict;
    short_lengths[key] = sf.size();
  }
  for (const auto& [key, cls] : short_classes) {
    if (cls == kConflict) continue;
    const size_t n = short_lengths[key];
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      const std::span<const Token> toks(doc.sentences[s].tokens);
      for (size_t b = 0; b + n <= toks.size(); ++b)
        if (window_key(toks.subspan(b, n)) == key)
          for (size_t t = b; t < b + n; ++t) merge_vote(votes[s][t], cls);
    }
  }
  return finalize(std::move(votes));
}

}  // namespace internal

DocumentVotes apply_synset_lf(const SynsetIndex& syn, const TermClassMap& tcm, const Document& doc,
                              SynsetMode mode) {
  // Non-owning handles; the labeler does not outlive this call.
  internal::SynsetLabeler labeler(std::shared_ptr<const SynsetIndex>(&syn, [](const SynsetIndex*) {}),
                                  std::shared_ptr<const TermClassMap>(&tcm, [](const TermClassMap*) {}));
  return mode == SynsetMode::kAnyPair ? labeler.apply_any_pair(doc)
                                      : labeler.apply_schwartz_hearst(doc);
}

}  // namespace wsner
