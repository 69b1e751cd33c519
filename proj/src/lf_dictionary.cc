// Dictionary-driven labeling: semantic type templates and guideline lists.

#include <algorithm>

#include "wsner/labelers.h"
#include "wsner/text.h"

namespace wsner {

SlotPattern parse_slot_pattern(std::string_view pattern) {
  SlotPattern out;
  for (auto part : text::split(text::trim(pattern), ' ')) {
    if (part.empty()) continue;
    if (part == "{*}")
      out.elements.emplace_back(std::nullopt);
    else
      out.elements.emplace_back(std::string(part));
  }
  const bool has_slot = std::any_of(out.elements.begin(), out.elements.end(),
                                    [](const auto& e) { return !e.has_value(); });
  if (!has_slot) throw Error("slot pattern '" + std::string(pattern) + "' has no {*} slot");
  return out;
}

const std::vector<SlotPattern>& default_slot_patterns() {
  static const std::vector<SlotPattern> patterns = {parse_slot_pattern("{*} ( {*} )"),
                                                    parse_slot_pattern("{*} - {*}")};
  return patterns;
}

namespace {

struct Composition {
  size_t end = 0;
  std::vector<const ClassVector*> slots;
};

void compose(std::span<const Token> tokens, size_t pos, const SlotPattern& pattern, size_t idx,
             const TermClassMap& tcm, std::vector<const ClassVector*>& slots, Composition& best) {
  if (idx == pattern.elements.size()) {
    if (pos > best.end) best = {pos, slots};
    return;
  }
  const auto& element = pattern.elements[idx];
  if (element) {
    if (pos < tokens.size() && tokens[pos].text == *element)
      compose(tokens, pos + 1, pattern, idx + 1, tcm, slots, best);
    return;
  }
  const size_t limit = std::min(tcm.max_token_length(), tokens.size() - pos);
  for (size_t n = limit; n >= 1; --n) {
    const ClassVector* v = tcm.find(window_key(tokens.subspan(pos, n)));
    if (!v) continue;
    slots.push_back(v);
    compose(tokens, pos + n, pattern, idx + 1, tcm, slots, best);
    slots.pop_back();
  }
}

int composed_class(const std::vector<const ClassVector*>& slots) {
  ClassVector mean(slots.front()->size(), 0.0);
  for (const auto* v : slots)
    for (size_t c = 0; c < mean.size(); ++c) mean[c] += (*v)[c];
  return argmax_or_abstain(mean);
}

}  // namespace

SentenceVotes apply_semantic_type_lf(const TermClassMap& tcm, const Sentence& sentence,
                                     std::span<const SlotPattern> slot_patterns) {
  const std::span<const Token> tokens(sentence.tokens);
  SentenceVotes votes(tokens.size(), kAbstain);
  size_t i = 0;
  while (i < tokens.size()) {
    const Match plain = tcm.matcher().longest_at(tokens, i);
    Composition best{plain.end, {}};
    std::vector<const ClassVector*> slots;
    for (const auto& p : slot_patterns) compose(tokens, i, p, 0, tcm, slots, best);

    if (best.end <= i) {
      ++i;
      continue;
    }
    int cls;
    if (!best.slots.empty()) {
      cls = composed_class(best.slots);
    } else {
      cls = argmax_or_abstain(*tcm.find(*plain.key));
    }
    std::fill(votes.begin() + static_cast<std::ptrdiff_t>(i),
              votes.begin() + static_cast<std::ptrdiff_t>(best.end), cls);
    i = best.end;
  }
  return votes;
}

GuidelineDictionary GuidelineDictionary::build(const std::vector<std::string>& positive,
                                               const std::vector<std::string>& negative,
                                               int entity_class, int default_class,
                                               const StopwordSet& stopwords) {
  GuidelineDictionary d;
  d.entity_class = entity_class;
  d.default_class = default_class;
  d.stopwords = stopwords;
  for (const auto& t : positive)
    if (auto norm = preprocess_term(t, stopwords)) d.positive.insert(term_key(*norm), 0, term_token_length(*norm));
  for (const auto& t : negative) {
    auto norm = preprocess_term(t, stopwords);
    if (!norm) continue;
    const auto key = term_key(*norm);
    if (d.positive.find(key))
      throw Error("guideline term '" + t + "' is listed as both positive and negative");
    d.negative.insert(key, 0, term_token_length(*norm));
  }
  return d;
}

SentenceVotes apply_guideline_dict_lf(const GuidelineDictionary& dict, const Sentence& sentence) {
  const std::span<const Token> tokens(sentence.tokens);
  SentenceVotes votes(tokens.size(), kAbstain);
  size_t i = 0;
  while (i < tokens.size()) {
    const Match pos = dict.positive.longest_at(tokens, i);
    const Match neg = dict.negative.longest_at(tokens, i);
    const Match& hit = (neg.end > pos.end) ? neg : pos;
    if (hit.end > i) {
      const int cls = (&hit == &pos) ? dict.entity_class : dict.default_class;
      for (size_t t = i; t < hit.end; ++t) votes[t] = cls;
      i = hit.end;
      continue;
    }
    const std::string& w = tokens[i].text;
    if ((dict.vote_punctuation && text::all_punct(w)) || (dict.vote_numbers && text::is_number(w)) ||
        (dict.vote_stopwords && dict.stopwords.count(text::lower(w))))
      votes[i] = dict.default_class;
    ++i;
  }
  return votes;
}

}  // namespace wsner
