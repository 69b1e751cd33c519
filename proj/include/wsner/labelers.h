#ifndef WSNER_LABELERS_H_
#define WSNER_LABELERS_H_

#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsner/corpus.h"
#include "wsner/label_matrix.h"
#include "wsner/ontology.h"

namespace wsner {

enum class LfKind { kSemanticType, kSynset, kPattern, kGuidelineDict, kCueWindow, kNearestDatetime };

std::string_view to_string(LfKind kind);
LfKind parse_lf_kind(std::string_view s);

using SentenceVotes = std::vector<int>;
using DocumentVotes = std::vector<SentenceVotes>;  // [sentence][token]

// ---------------------------------------------------------------------------
// Semantic type dictionaries

// Token template with `{*}` slots, e.g. "{*} ( {*} )". Literal elements match a
// token exactly; each slot matches one dictionary term.
struct SlotPattern {
  std::vector<std::optional<std::string>> elements;  // nullopt = slot
};

SlotPattern parse_slot_pattern(std::string_view pattern);
// The parenthetical template and a spaced-hyphen compound template.
const std::vector<SlotPattern>& default_slot_patterns();

// Greedy left-to-right longest match; each match votes the argmax of its class
// vector (abstain on ties). A slot pattern wins when it composes a longer span
// than the plain match, voting the argmax of the mean of its slot vectors.
SentenceVotes apply_semantic_type_lf(const TermClassMap& tcm, const Sentence& sentence,
                                     std::span<const SlotPattern> slot_patterns = {});

// ---------------------------------------------------------------------------
// Synsets

enum class SynsetMode { kAnyPair, kSchwartzHearst };

// Class of each synset: argmax of the mean class vector of its members found
// in the dictionary; synsets with no dictionary member or a tie are absent.
std::map<std::string, int> synset_classes(const SynsetIndex& syn, const TermClassMap& tcm);

struct AbbreviationPair {
  TokenSpan short_form;
  TokenSpan long_form;
  std::string short_text;
  std::string long_text;
};

// Schwartz-Hearst long-form search: aligns the characters of the short form,
// right to left, against the candidate text. Returns the shortest word-aligned
// suffix of the candidate or nullopt.
std::optional<std::string> find_best_long_form(std::string_view short_form,
                                               std::string_view long_form);

// Schwartz-Hearst acceptance filters applied to a found long form.
bool accept_abbreviation(std::string_view short_form, std::string_view best_long_form);

// "long form ( SF )" and "SF ( long form )" definitions in each sentence.
std::vector<AbbreviationPair> find_abbreviations(const Document& doc);

DocumentVotes apply_synset_lf(const SynsetIndex& syn, const TermClassMap& tcm, const Document& doc,
                              SynsetMode mode);

// ---------------------------------------------------------------------------
// Regular expressions

// Compiled ECMAScript patterns. Construction throws Error on an invalid
// pattern, so configuration errors surface at load time.
class PatternSet {
 public:
  explicit PatternSet(std::vector<std::string> patterns, bool ignore_case = false);
  const std::vector<std::string>& sources() const { return sources_; }
  // Character ranges [begin, end) of every non-empty match in `s`.
  std::vector<std::pair<size_t, size_t>> find_all(std::string_view s) const;

 private:
  std::vector<std::string> sources_;
  std::vector<std::regex> compiled_;
};

// Tokens overlapped by any match vote `label`; all others abstain.
SentenceVotes apply_pattern_lf(const PatternSet& patterns, int label, const Document& doc,
                               const Sentence& sentence);

// ---------------------------------------------------------------------------
// Guideline dictionaries

struct GuidelineDictionary {
  TermSet positive;
  TermSet negative;
  int entity_class = 1;
  int default_class = 0;
  StopwordSet stopwords;
  bool vote_stopwords = true;
  bool vote_numbers = true;
  bool vote_punctuation = true;

  // Terms are preprocessed like terminologies. A term in both lists is a
  // configuration error.
  static GuidelineDictionary build(const std::vector<std::string>& positive,
                                   const std::vector<std::string>& negative, int entity_class,
                                   int default_class,
                                   const StopwordSet& stopwords = default_stopwords());
};

SentenceVotes apply_guideline_dict_lf(const GuidelineDictionary& dict, const Sentence& sentence);

// ---------------------------------------------------------------------------
// Entity-context rules (span tasks)

enum class CueDirection { kLeft, kRight, kBoth };

struct CueRule {
  std::vector<std::string> patterns;  // phrases or regular expressions, case-insensitive
  CueDirection direction = CueDirection::kLeft;
  size_t window = 6;
  int label = 1;
  std::vector<std::string> terminators;
};

// Compiled cue rule; construction validates the window and compiles patterns.
class CueMatcher {
 public:
  explicit CueMatcher(CueRule rule);
  const CueRule& rule() const { return rule_; }
  // Vote for one entity span of `sentence`.
  int vote(const Sentence& sentence, const TokenSpan& entity) const;

 private:
  bool matches(std::span<const Token> window) const;
  CueRule rule_;
  std::vector<std::regex> compiled_;
  std::vector<std::vector<std::string>> terminators_;  // lowercased token sequences
};

// One vote per entity. Throws Error for an entity outside the document.
std::vector<int> apply_cue_window_lf(const CueMatcher& rule, const Document& doc,
                                     std::span<const TokenSpan> entities);

struct DatetimeRule {
  std::vector<std::string> timex_patterns;  // empty -> built-in numeric and month-name forms
  std::set<std::string> past_sections;      // lowercased header names
  int before_class = 0;
  int overlap_class = 1;
  int after_class = 2;

  static DatetimeRule defaults(int before_class, int overlap_class, int after_class);
};

// Normalizes m/d, m/d/yy, m/d/yyyy, yyyy-mm-dd and month-name dates. Missing
// years come from `reference`.
std::optional<Date> normalize_datetime(std::string_view mention, const Date& reference);

struct DatetimeMention {
  size_t sentence = 0;
  size_t begin = 0;
  size_t end = 0;
  Date date;
};

class DatetimeMatcher {
 public:
  explicit DatetimeMatcher(DatetimeRule rule);
  const DatetimeRule& rule() const { return rule_; }
  std::vector<DatetimeMention> mentions(const Document& doc, Warnings* warnings) const;
  // Lowercased name of the section header governing a character offset, if any.
  std::optional<std::string> section_at(const Document& doc, size_t char_offset) const;

 private:
  DatetimeRule rule_;
  PatternSet timex_;
};

// One vote per entity: the nearest datetime mention in the same sentence
// (token distance, earlier mention wins ties) gives before/overlap/after
// relative to the document timestamp; otherwise a past-history section votes
// before; otherwise abstain.
std::vector<int> apply_nearest_datetime_lf(const DatetimeMatcher& rule, const Document& doc,
                                           std::span<const TokenSpan> entities,
                                           Warnings* warnings = nullptr);

// ---------------------------------------------------------------------------
// Labeling functions

class LabelingFunction {
 public:
  explicit LabelingFunction(std::string name) : name_(std::move(name)) {}
  virtual ~LabelingFunction() = default;

  const std::string& name() const { return name_; }
  virtual LfKind kind() const = 0;
  // True for functions that vote per pre-identified entity.
  bool span_level() const {
    return kind() == LfKind::kCueWindow || kind() == LfKind::kNearestDatetime;
  }
  // Votes for every token of the document. Span-level functions place each
  // entity's vote on its first token and abstain elsewhere.
  virtual DocumentVotes apply(const Document& doc, std::span<const TokenSpan> entities) const = 0;

 private:
  std::string name_;
};

using LfPtr = std::shared_ptr<const LabelingFunction>;

LfPtr make_semantic_type_lf(std::string name, std::shared_ptr<const TermClassMap> tcm,
                            std::vector<SlotPattern> slot_patterns = {});
LfPtr make_synset_lf(std::string name, std::shared_ptr<const SynsetIndex> syn,
                     std::shared_ptr<const TermClassMap> tcm, SynsetMode mode);
LfPtr make_pattern_lf(std::string name, PatternSet patterns, int label);
LfPtr make_guideline_dict_lf(std::string name, GuidelineDictionary dict);
LfPtr make_cue_window_lf(std::string name, CueRule rule);
LfPtr make_nearest_datetime_lf(std::string name, DatetimeRule rule);

// Entities per document (outer index = corpus document order).
using EntityIndex = std::vector<std::vector<TokenSpan>>;

EntityIndex entities_from_gold(const Corpus& corpus, Warnings* warnings = nullptr);

// Applies every function to every document. Rows follow corpus order; column j
// holds lfs[j]. Documents are processed in parallel; the result does not depend
// on the thread count.
LabelMatrix build_label_matrix(const Corpus& corpus, std::span<const LfPtr> lfs,
                               const TaskSchema& schema, const EntityIndex* entities = nullptr);
// Single-threaded reference with identical output.
LabelMatrix build_label_matrix_serial(const Corpus& corpus, std::span<const LfPtr> lfs,
                                      const TaskSchema& schema,
                                      const EntityIndex* entities = nullptr);

}  // namespace wsner

#endif  // WSNER_LABELERS_H_
