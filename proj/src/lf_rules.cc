// Rule-based labeling: regular expressions, cue windows and datetime rules.

#include <algorithm>
#include <array>
#include <cstdlib>

#include "wsner/labelers.h"
#include "wsner/text.h"

namespace wsner {

PatternSet::PatternSet(std::vector<std::string> patterns, bool ignore_case)
    : sources_(std::move(patterns)) {
  auto flags = std::regex::ECMAScript | std::regex::optimize;
  if (ignore_case) flags |= std::regex::icase;
  for (const auto& p : sources_) {
    try {
      compiled_.emplace_back(p, flags);
    } catch (const std::regex_error& e) {
      throw Error("invalid pattern '" + p + "': " + e.what());
    }
  }
}

std::vector<std::pair<size_t, size_t>> PatternSet::find_all(std::string_view s) const {
  std::vector<std::pair<size_t, size_t>> out;
  const std::string str(s);
  for (const auto& re : compiled_) {
    for (auto it = std::sregex_iterator(str.begin(), str.end(), re); it != std::sregex_iterator();
         ++it) {
      const auto b = static_cast<size_t>(it->position());
      const auto len = static_cast<size_t>(it->length());
      if (len) out.emplace_back(b, b + len);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SentenceVotes apply_pattern_lf(const PatternSet& patterns, int label, const Document& doc,
                               const Sentence& sentence) {
  SentenceVotes votes(sentence.tokens.size(), kAbstain);
  if (sentence.tokens.empty()) return votes;
  const size_t base = sentence.tokens.front().char_start;
  const size_t end = sentence.tokens.back().char_end;
  const auto matches = patterns.find_all(std::string_view(doc.text).substr(base, end - base));
  for (const auto& [mb, me] : matches) {
    for (size_t t = 0; t < sentence.tokens.size(); ++t) {
      const Token& tok = sentence.tokens[t];
      if (tok.char_start < base + me && base + mb < tok.char_end) votes[t] = label;
    }
  }
  return votes;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> lowered_tokens(std::string_view phrase) {
  std::vector<std::string> out;
  for (const auto& s : tokenize(phrase))
    for (const auto& t : s.tokens) out.push_back(text::lower(t.text));
  return out;
}

bool phrase_at(std::span<const Token> window, size_t pos, const std::vector<std::string>& phrase) {
  if (phrase.empty() || pos + phrase.size() > window.size()) return false;
  for (size_t i = 0; i < phrase.size(); ++i)
    if (text::lower(window[pos + i].text) != phrase[i]) return false;
  return true;
}

void check_entity(const Document& doc, const TokenSpan& e) {
  if (e.sentence >= doc.sentences.size() || e.begin >= e.end ||
      e.end > doc.sentences[e.sentence].tokens.size())
    throw Error("entity span (sentence " + std::to_string(e.sentence) + ", tokens " +
                std::to_string(e.begin) + ".." + std::to_string(e.end) + ") is outside document '" +
                doc.id + "'");
}

}  // namespace

CueMatcher::CueMatcher(CueRule rule) : rule_(std::move(rule)) {
  if (rule_.window < 1) throw Error("cue rule window must be >= 1");
  if (rule_.patterns.empty()) throw Error("cue rule has no patterns");
  for (const auto& p : rule_.patterns) {
    try {
      compiled_.emplace_back("(?:^|\\s)(?:" + p + ")(?=\\s|$)",
                             std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error("invalid cue pattern '" + p + "': " + e.what());
    }
  }
  for (const auto& t : rule_.terminators) {
    auto toks = lowered_tokens(t);
    if (!toks.empty()) terminators_.push_back(std::move(toks));
  }
}

bool CueMatcher::matches(std::span<const Token> window) const {
  if (window.empty()) return false;
  std::string joined;
  for (size_t i = 0; i < window.size(); ++i) {
    if (i) joined += ' ';
    joined += text::lower(window[i].text);
  }
  for (const auto& re : compiled_)
    if (std::regex_search(joined, re)) return true;
  return false;
}

int CueMatcher::vote(const Sentence& sentence, const TokenSpan& entity) const {
  const std::span<const Token> toks(sentence.tokens);
  if (rule_.direction != CueDirection::kRight) {
    const size_t b = entity.begin > rule_.window ? entity.begin - rule_.window : 0;
    auto window = toks.subspan(b, entity.begin - b);
    // Keep only what lies after the terminator closest to the entity.
    size_t cut = 0;
    for (size_t p = 0; p < window.size(); ++p)
      for (const auto& term : terminators_)
        if (phrase_at(window, p, term)) cut = std::max(cut, p + term.size());
    if (matches(window.subspan(std::min(cut, window.size())))) return rule_.label;
  }
  if (rule_.direction != CueDirection::kLeft) {
    const size_t e = std::min(toks.size(), entity.end + rule_.window);
    auto window = toks.subspan(entity.end, e - entity.end);
    size_t cut = window.size();
    for (size_t p = 0; p < window.size(); ++p)
      for (const auto& term : terminators_)
        if (phrase_at(window, p, term)) cut = std::min(cut, p);
    if (matches(window.subspan(0, cut))) return rule_.label;
  }
  return kAbstain;
}

std::vector<int> apply_cue_window_lf(const CueMatcher& rule, const Document& doc,
                                     std::span<const TokenSpan> entities) {
  std::vector<int> out;
  out.reserve(entities.size());
  for (const auto& e : entities) {
    check_entity(doc, e);
    out.push_back(rule.vote(doc.sentences[e.sentence], e));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kMonthAlternation =
    "(?:jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|june?|july?|aug(?:ust)?|"
    "sep(?:t(?:ember)?)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?)";

std::vector<std::string> builtin_timex() {
  const std::string month = kMonthAlternation;
  return {
      "\\b\\d{4}-\\d{1,2}-\\d{1,2}\\b",
      "\\b\\d{1,2}/\\d{1,2}(?:/\\d{4}|/\\d{2})?\\b",
      "\\b" + month + "\\.?\\s+\\d{1,2}(?:st|nd|rd|th)?(?:,?\\s+\\d{4})?\\b",
      "\\b\\d{1,2}\\s+" + month + "\\.?(?:,?\\s+\\d{4})?\\b",
  };
}

std::optional<unsigned> month_from_name(std::string_view name) {
  static const std::array<const char*, 12> full = {"january", "february", "march",     "april",
                                                   "may",     "june",     "july",      "august",
                                                   "september", "october", "november", "december"};
  const std::string w = text::lower(name);
  for (unsigned i = 0; i < 12; ++i) {
    const std::string f = full[i];
    if (w == f || w == f.substr(0, 3) || (i == 8 && w == "sept")) return i + 1;
  }
  return std::nullopt;
}

std::optional<Date> make_date(int y, unsigned m, unsigned d) {
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

int expand_year(const std::string& y) {
  const int v = std::atoi(y.c_str());
  if (y.size() == 4) return v;
  return v < 50 ? 2000 + v : 1900 + v;
}

}  // namespace

std::optional<Date> normalize_datetime(std::string_view mention, const Date& reference) {
  static const std::regex iso("^(\\d{4})-(\\d{1,2})-(\\d{1,2})$");
  static const std::regex slash("^(\\d{1,2})/(\\d{1,2})(?:/(\\d{4}|\\d{2}))?$");
  static const std::regex month_day("^([A-Za-z]+)\\.?\\s+(\\d{1,2})(?:st|nd|rd|th)?(?:,?\\s+(\\d{4}))?$");
  static const std::regex day_month("^(\\d{1,2})\\s+([A-Za-z]+)\\.?(?:,?\\s+(\\d{4}))?$");
  const std::string s(text::trim(mention));
  const int ref_year = static_cast<int>(reference.year());
  std::smatch m;
  if (std::regex_match(s, m, iso))
    return make_date(std::stoi(m[1]), static_cast<unsigned>(std::stoi(m[2])),
                     static_cast<unsigned>(std::stoi(m[3])));
  if (std::regex_match(s, m, slash))
    return make_date(m[3].matched ? expand_year(m[3]) : ref_year,
                     static_cast<unsigned>(std::stoi(m[1])), static_cast<unsigned>(std::stoi(m[2])));
  if (std::regex_match(s, m, month_day)) {
    auto mon = month_from_name(m[1].str());
    if (!mon) return std::nullopt;
    return make_date(m[3].matched ? std::stoi(m[3]) : ref_year, *mon,
                     static_cast<unsigned>(std::stoi(m[2])));
  }
  if (std::regex_match(s, m, day_month)) {
    auto mon = month_from_name(m[2].str());
    if (!mon) return std::nullopt;
    return make_date(m[3].matched ? std::stoi(m[3]) : ref_year, *mon,
                     static_cast<unsigned>(std::stoi(m[1])));
  }
  return std::nullopt;
}

DatetimeRule DatetimeRule::defaults(int before_class, int overlap_class, int after_class) {
  DatetimeRule r;
  r.before_class = before_class;
  r.overlap_class = overlap_class;
  r.after_class = after_class;
  r.past_sections = {"past medical history", "past surgical history", "pmh", "psh",
                     "past history"};
  return r;
}

DatetimeMatcher::DatetimeMatcher(DatetimeRule rule)
    : rule_(std::move(rule)),
      timex_(rule_.timex_patterns.empty() ? builtin_timex() : rule_.timex_patterns, true) {}

std::vector<DatetimeMention> DatetimeMatcher::mentions(const Document& doc, Warnings* warnings) const {
  std::vector<DatetimeMention> out;
  if (!doc.timestamp) return out;
  for (size_t s = 0; s < doc.sentences.size(); ++s) {
    const auto& toks = doc.sentences[s].tokens;
    if (toks.empty()) continue;
    const size_t base = toks.front().char_start;
    const std::string_view sent =
        std::string_view(doc.text).substr(base, toks.back().char_end - base);
    auto found = timex_.find_all(sent);
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    size_t last_end = 0;
    for (const auto& [mb, me] : found) {
      if (mb < last_end) continue;  // overlapping alternative of an earlier match
      last_end = me;
      const auto date = normalize_datetime(sent.substr(mb, me - mb), *doc.timestamp);
      if (!date) {
        if (warnings)
          warnings->push_back("document '" + doc.id + "': unparseable datetime '" +
                              std::string(sent.substr(mb, me - mb)) + "' skipped");
        continue;
      }
      size_t b = toks.size(), e = 0;
      for (size_t t = 0; t < toks.size(); ++t)
        if (toks[t].char_start < base + me && base + mb < toks[t].char_end) {
          b = std::min(b, t);
          e = t + 1;
        }
      if (b < e) out.push_back({s, b, e, *date});
    }
  }
  return out;
}

std::optional<std::string> DatetimeMatcher::section_at(const Document& doc, size_t offset) const {
  static const std::regex header("^[ \\t]*([A-Za-z][A-Za-z /&-]*[A-Za-z])[ \\t]*:");
  std::optional<std::string> current;
  size_t line_start = 0;
  while (line_start <= doc.text.size() && line_start <= offset) {
    size_t line_end = doc.text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = doc.text.size();
    const std::string line = doc.text.substr(line_start, line_end - line_start);
    std::smatch m;
    if (std::regex_search(line, m, header)) {
      const size_t header_pos = line_start + static_cast<size_t>(m.position(0));
      if (header_pos <= offset) current = text::lower(m[1].str());
    }
    line_start = line_end + 1;
  }
  return current;
}

std::vector<int> apply_nearest_datetime_lf(const DatetimeMatcher& rule, const Document& doc,
                                           std::span<const TokenSpan> entities, Warnings* warnings) {
  std::vector<int> out(entities.size(), kAbstain);
  for (const auto& e : entities) check_entity(doc, e);
  if (!doc.timestamp) {
    if (warnings && !entities.empty())
      warnings->push_back("document '" + doc.id + "' has no timestamp; datetime rule abstains");
    return out;
  }
  const auto mentions = rule.mentions(doc, warnings);
  const auto& r = rule.rule();
  for (size_t i = 0; i < entities.size(); ++i) {
    const TokenSpan& e = entities[i];
    const DatetimeMention* nearest = nullptr;
    size_t best = SIZE_MAX;
    for (const auto& m : mentions) {
      if (m.sentence != e.sentence) continue;
      size_t d = 0;
      if (m.end <= e.begin)
        d = e.begin - m.end;
      else if (m.begin >= e.end)
        d = m.begin - e.end;
      if (d < best) {
        best = d;
        nearest = &m;
      }
    }
    if (nearest) {
      if (nearest->date < *doc.timestamp)
        out[i] = r.before_class;
      else if (nearest->date == *doc.timestamp)
        out[i] = r.overlap_class;
      else
        out[i] = r.after_class;
      continue;
    }
    const size_t offset = doc.sentences[e.sentence].tokens[e.begin].char_start;
    const auto section = rule.section_at(doc, offset);
    if (section && r.past_sections.count(*section)) out[i] = r.before_class;
  }
  return out;
}

}  // namespace wsner
