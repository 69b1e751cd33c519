#ifndef WSNER_CORPUS_H_
#define WSNER_CORPUS_H_

#include <chrono>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wsner/error.h"

namespace wsner {

inline constexpr int kAbstain = -1;

// Label domain shared by every stage: classes 0..k-1 plus abstain (-1).
struct TaskSchema {
  int k = 2;
  std::vector<std::string> class_names;
  int default_class = 0;

  // Throws Error on k < 2, wrong name count, duplicate names or a bad default.
  void validate() const;
  bool valid_class(int c) const { return c >= 0 && c < k; }
  // Class index by name; throws Error naming the unknown class.
  int class_index(std::string_view name) const;
  const std::string& name(int c) const { return class_names.at(static_cast<size_t>(c)); }

  static TaskSchema binary(std::string negative, std::string positive);
};

struct Token {
  std::string text;
  size_t char_start = 0;  // inclusive byte offset into Document::text
  size_t char_end = 0;    // exclusive
};

struct Sentence {
  std::vector<Token> tokens;
  size_t index = 0;
};

using Date = std::chrono::year_month_day;

struct Document {
  std::string id;
  std::string text;
  std::vector<Sentence> sentences;
  std::optional<Date> timestamp;

  size_t token_count() const;
};

struct GoldSpan {
  std::string doc_id;
  size_t char_start = 0;
  size_t char_end = 0;
  int class_label = 0;
};

// Position of a token within a corpus. Row order everywhere is documents in
// corpus order, then sentences, then tokens.
struct RowRef {
  size_t doc = 0;
  size_t sentence = 0;
  size_t token = 0;
};

struct Corpus {
  std::vector<Document> documents;
  std::vector<GoldSpan> gold;  // grouped by document in corpus order

  size_t token_count() const;
  size_t sentence_count() const;
  std::vector<RowRef> rows() const;
  // First row of every sentence, per document: offsets[d][s].
  std::vector<std::vector<size_t>> sentence_offsets() const;
  // Gold spans of one document, in file order.
  std::vector<GoldSpan> gold_for(const std::string& doc_id) const;
  // Index of a document by id, or npos.
  size_t find(std::string_view doc_id) const;

  static constexpr size_t npos = static_cast<size_t>(-1);
};

// Whitespace tokenization with punctuation detachment and rule-based sentence
// splitting. Empty or all-whitespace text yields no sentences.
std::vector<Sentence> tokenize(std::string_view text);

// Reads line-delimited JSON records {id, text, spans?, timestamp?}. Blank lines
// are skipped. Errors carry the 1-based line number.
Corpus ingest_corpus(const std::string& path, const TaskSchema& schema);
Corpus ingest_corpus(std::istream& in, const TaskSchema& schema);

// Writes the same record format read by ingest_corpus.
void write_corpus(const Corpus& corpus, std::ostream& out);
void write_corpus(const Corpus& corpus, const std::string& path);

// Parses YYYY-MM-DD (optionally followed by a time part, which is ignored).
std::optional<Date> parse_iso_date(std::string_view s);
std::string format_iso_date(const Date& d);

struct Alignment {
  std::vector<std::vector<int>> tags;  // [sentence][token], IO class indices
  Warnings warnings;
};

// Projects character spans onto tokens. Tokens that partially intersect a span
// are expanded into it with a warning. Overlapping spans of different classes
// are rejected.
Alignment align_gold(const Document& doc, const std::vector<GoldSpan>& spans,
                     const TaskSchema& schema);

// Token span within one sentence, [begin, end).
struct TokenSpan {
  size_t sentence = 0;
  size_t begin = 0;
  size_t end = 0;
};

// A pre-identified entity: the token span covered by a gold span and its class.
struct Entity {
  TokenSpan span;
  int class_label = 0;
};

// Token spans covered by each gold span, in input order. A span crossing a
// sentence boundary is clipped to the first sentence it touches; spans that
// touch no token are dropped with a warning.
std::vector<Entity> gold_entities(const Document& doc, const std::vector<GoldSpan>& spans,
                                  Warnings* warnings = nullptr);

}  // namespace wsner

#endif  // WSNER_CORPUS_H_
