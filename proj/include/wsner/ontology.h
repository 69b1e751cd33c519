#ifndef WSNER_ONTOLOGY_H_
#define WSNER_ONTOLOGY_H_

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "wsner/corpus.h"
#include "wsner/matcher.h"

namespace wsner {

using StopwordSet = std::unordered_set<std::string>;

// Versioned English stopword list shipped with the library (lowercase).
const StopwordSet& default_stopwords();
// One word per line; blank lines and '#' comments ignored; entries lowercased.
StopwordSet load_stopwords(const std::string& path);

struct Terminology {
  std::string name;
  std::map<std::string, std::set<std::string>> entries;  // term -> semantic types
};

// `term \t semantic_type` lines. Duplicate lines are idempotent.
Terminology load_terminology(const std::string& path, const std::string& name);
Terminology load_terminology(std::istream& in, const std::string& name);

// Normalized form of one term, or nullopt when the term is a stopword, a pure
// number or a single character.
std::optional<std::string> preprocess_term(std::string_view term, const StopwordSet& stopwords);

// Applies preprocess_term to every entry and merges entries that collapse to
// the same normalized term.
Terminology preprocess_terms(const Terminology& t, const StopwordSet& stopwords);

// Semantic type -> class index, or kAbstain. A "*" entry, when present, maps
// every type not listed explicitly.
struct ClassMap {
  std::map<std::string, int> mapping;
  std::optional<int> fallback;

  // Throws Error naming the type when it has no mapping.
  int lookup(const std::string& semantic_type) const;
};

// JSON object {"TYPE": "class name" | "abstain" | integer, "*": ...}.
ClassMap load_class_map(const std::string& path, const TaskSchema& schema);
ClassMap parse_class_map(const std::string& json_text, const TaskSchema& schema);

using ClassVector = std::vector<double>;

// Term key -> class probability vector (sums to 1).
class TermClassMap {
 public:
  void insert(const std::string& key, ClassVector v, size_t token_length) {
    matcher_.insert(key, std::move(v), token_length);
  }
  const ClassVector* find(std::string_view key) const { return matcher_.find(key); }
  size_t size() const { return matcher_.size(); }
  size_t max_token_length() const { return matcher_.max_token_length(); }
  const DictionaryMatcher<ClassVector>& matcher() const { return matcher_; }

 private:
  DictionaryMatcher<ClassVector> matcher_;
};

// Probability of class c for a term is the share of its non-abstain mapped
// semantic types (pooled as a set across terminologies) that map to c. Terms
// whose types all map to abstain are dropped.
TermClassMap build_term_class_map(const std::vector<Terminology>& ts, const ClassMap& cm,
                                  const TaskSchema& schema);

// Argmax class of a probability vector, or kAbstain on an exact tie.
int argmax_or_abstain(const ClassVector& v);

struct SynsetIndex {
  std::map<std::string, std::set<std::string>> synsets;   // id -> member term keys
  std::map<std::string, std::set<std::string>> term_ids;  // term key -> synset ids

  size_t size() const { return synsets.size(); }
};

// `synset_id \t term` lines. Terms are preprocessed; synsets left with fewer
// than two distinct terms are dropped.
SynsetIndex build_synsets(const std::string& path,
                          const StopwordSet& stopwords = default_stopwords());
SynsetIndex build_synsets(std::istream& in, const StopwordSet& stopwords = default_stopwords());

struct RankedTerminology {
  std::string name;
  size_t coverage = 0;
};

struct PartitionPlan {
  size_t s = 1;
  std::vector<RankedTerminology> ranked;
  std::vector<Terminology> head;
  Terminology tail_merged;  // empty entries when s == |ts|

  bool has_tail() const { return !tail_merged.entries.empty(); }
};

// Coverage of each terminology on a corpus: the number of documents in which
// each of its terms occurs as a greedy longest match, summed over terms.
std::vector<size_t> terminology_coverage(const std::vector<Terminology>& ts, const Corpus& corpus);

// Ranks by coverage (descending, ties by name) and splits into the top s and a
// merged remainder.
PartitionPlan rank_and_partition(const std::vector<Terminology>& ts, const Corpus& corpus,
                                 size_t s);

}  // namespace wsner

#endif  // WSNER_ONTOLOGY_H_
