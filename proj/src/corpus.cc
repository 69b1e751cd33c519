#include "wsner/corpus.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "wsner/text.h"

namespace wsner {

using json = nlohmann::json;

void TaskSchema::validate() const {
  if (k < 2) throw Error("task schema: k must be >= 2, got " + std::to_string(k));
  if (class_names.size() != static_cast<size_t>(k))
    throw Error("task schema: expected " + std::to_string(k) + " class names, got " +
                std::to_string(class_names.size()));
  std::set<std::string> seen;
  for (const auto& n : class_names)
    if (!seen.insert(n).second) throw Error("task schema: duplicate class name '" + n + "'");
  if (!valid_class(default_class))
    throw Error("task schema: default class " + std::to_string(default_class) +
                " out of range");
}

int TaskSchema::class_index(std::string_view name) const {
  for (int c = 0; c < k; ++c)
    if (class_names[static_cast<size_t>(c)] == name) return c;
  throw Error("unknown class '" + std::string(name) + "'");
}

TaskSchema TaskSchema::binary(std::string negative, std::string positive) {
  TaskSchema s;
  s.k = 2;
  s.class_names = {std::move(negative), std::move(positive)};
  s.default_class = 0;
  return s;
}

size_t Document::token_count() const {
  size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

size_t Corpus::token_count() const {
  size_t n = 0;
  for (const auto& d : documents) n += d.token_count();
  return n;
}

size_t Corpus::sentence_count() const {
  size_t n = 0;
  for (const auto& d : documents) n += d.sentences.size();
  return n;
}

std::vector<RowRef> Corpus::rows() const {
  std::vector<RowRef> out;
  out.reserve(token_count());
  for (size_t d = 0; d < documents.size(); ++d)
    for (size_t s = 0; s < documents[d].sentences.size(); ++s)
      for (size_t t = 0; t < documents[d].sentences[s].tokens.size(); ++t) out.push_back({d, s, t});
  return out;
}

std::vector<std::vector<size_t>> Corpus::sentence_offsets() const {
  std::vector<std::vector<size_t>> out(documents.size());
  size_t row = 0;
  for (size_t d = 0; d < documents.size(); ++d) {
    out[d].reserve(documents[d].sentences.size());
    for (const auto& s : documents[d].sentences) {
      out[d].push_back(row);
      row += s.tokens.size();
    }
  }
  return out;
}

std::vector<GoldSpan> Corpus::gold_for(const std::string& doc_id) const {
  std::vector<GoldSpan> out;
  for (const auto& g : gold)
    if (g.doc_id == doc_id) out.push_back(g);
  return out;
}

size_t Corpus::find(std::string_view doc_id) const {
  for (size_t i = 0; i < documents.size(); ++i)
    if (documents[i].id == doc_id) return i;
  return npos;
}

namespace {

bool is_terminal(std::string_view tok) { return tok == "." || tok == "!" || tok == "?"; }

// True when a '.' sits between two letters somewhere in s ("q.d", "e.g").
bool has_internal_period(std::string_view s) {
  for (size_t i = 1; i + 1 < s.size(); ++i)
    if (s[i] == '.' && text::is_alpha(s[i - 1]) && text::is_alpha(s[i + 1])) return true;
  return false;
}

void split_chunk(std::string_view text, size_t b, size_t e, std::vector<Token>& out) {
  while (b < e && text::is_punct(text[b])) {
    out.push_back({std::string(1, text[b]), b, b + 1});
    ++b;
  }
  std::vector<Token> trailing;
  while (e > b && text::is_punct(text[e - 1])) {
    if (text[e - 1] == '.' && e - 1 > b && text::is_alpha(text[e - 2]) &&
        has_internal_period(text.substr(b, e - 1 - b)))
      break;
    trailing.push_back({std::string(1, text[e - 1]), e - 1, e});
    --e;
  }
  if (e > b) out.push_back({std::string(text.substr(b, e - b)), b, e});
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

}  // namespace

std::vector<Sentence> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text::is_space(text[i])) ++i;
    const size_t b = i;
    while (i < text.size() && !text::is_space(text[i])) ++i;
    if (i > b) split_chunk(text, b, i, tokens);
  }

  std::vector<Sentence> sentences;
  for (size_t t = 0; t < tokens.size(); ++t) {
    bool boundary = t == 0;
    if (!boundary) {
      const Token& prev = sentences.back().tokens.back();
      const std::string_view gap = text.substr(prev.char_end, tokens[t].char_start - prev.char_end);
      if (gap.find('\n') != std::string_view::npos) {
        boundary = true;
      } else if (is_terminal(prev.text) && !gap.empty() && text::is_upper(tokens[t].text[0])) {
        boundary = true;
      }
    }
    if (boundary) {
      sentences.push_back({});
      sentences.back().index = sentences.size() - 1;
    }
    sentences.back().tokens.push_back(std::move(tokens[t]));
  }
  return sentences;
}

std::optional<Date> parse_iso_date(std::string_view s) {
  s = text::trim(s);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  for (size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!text::is_digit(s[i])) return std::nullopt;
  if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return std::nullopt;
  const int y = std::stoi(std::string(s.substr(0, 4)));
  const unsigned m = static_cast<unsigned>(std::stoi(std::string(s.substr(5, 2))));
  const unsigned d = static_cast<unsigned>(std::stoi(std::string(s.substr(8, 2))));
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_iso_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

Corpus ingest_corpus(std::istream& in, const TaskSchema& schema) {
  schema.validate();
  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(where + "malformed JSON record (" + e.what() + ")");
    }
    if (!rec.is_object()) throw Error(where + "record is not a JSON object");
    if (!rec.contains("id") || !rec["id"].is_string())
      throw Error(where + "missing string field 'id'");
    if (!rec.contains("text") || !rec["text"].is_string())
      throw Error(where + "missing string field 'text'");

    Document doc;
    doc.id = rec["id"].get<std::string>();
    doc.text = rec["text"].get<std::string>();
    if (doc.id.empty()) throw Error(where + "empty document id");
    if (doc.id.find_first_of("\t\n") != std::string::npos)
      throw Error(where + "document id contains a tab or newline");
    if (!ids.insert(doc.id).second) throw Error(where + "duplicate document id '" + doc.id + "'");

    if (rec.contains("timestamp") && !rec["timestamp"].is_null()) {
      if (!rec["timestamp"].is_string()) throw Error(where + "'timestamp' must be a string");
      doc.timestamp = parse_iso_date(rec["timestamp"].get<std::string>());
      if (!doc.timestamp)
        throw Error(where + "unparseable timestamp '" + rec["timestamp"].get<std::string>() + "'");
    }

    if (rec.contains("spans") && !rec["spans"].is_null()) {
      const json& spans = rec["spans"];
      if (!spans.is_array()) throw Error(where + "'spans' must be an array");
      for (const json& sp : spans) {
        if (!sp.is_array() || sp.size() != 3 || !sp[0].is_number_integer() ||
            !sp[1].is_number_integer())
          throw Error(where + "span must be [start, end, class], got " + sp.dump());
        const long long s = sp[0].get<long long>();
        const long long e = sp[1].get<long long>();
        const std::string name = "span [" + std::to_string(s) + ", " + std::to_string(e) + ")";
        if (s < 0 || e <= s || static_cast<size_t>(e) > doc.text.size())
          throw Error(where + name + " out of range for document '" + doc.id + "' of length " +
                      std::to_string(doc.text.size()));
        int cls;
        if (sp[2].is_number_integer()) {
          cls = sp[2].get<int>();
        } else if (sp[2].is_string()) {
          try {
            cls = schema.class_index(sp[2].get<std::string>());
          } catch (const Error& e) {
            throw Error(where + name + ": " + e.what());
          }
        } else {
          throw Error(where + name + ": class must be an integer or class name");
        }
        if (!schema.valid_class(cls))
          throw Error(where + name + " has class " + std::to_string(cls) +
                      " outside the schema bound 0.." + std::to_string(schema.k - 1));
        corpus.gold.push_back({doc.id, static_cast<size_t>(s), static_cast<size_t>(e), cls});
      }
    }
    doc.sentences = tokenize(doc.text);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus ingest_corpus(const std::string& path, const TaskSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  try {
    return ingest_corpus(in, schema);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& doc : corpus.documents) {
    json rec;
    rec["id"] = doc.id;
    rec["text"] = doc.text;
    json spans = json::array();
    for (const auto& g : corpus.gold)
      if (g.doc_id == doc.id) spans.push_back({g.char_start, g.char_end, g.class_label});
    if (!spans.empty()) rec["spans"] = std::move(spans);
    if (doc.timestamp) rec["timestamp"] = format_iso_date(*doc.timestamp);
    out << rec.dump() << '\n';
  }
}

void write_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file '" + path + "'");
  write_corpus(corpus, out);
  if (!out) throw Error("write failed for '" + path + "'");
}

namespace {

bool overlaps(size_t a0, size_t a1, size_t b0, size_t b1) { return a0 < b1 && b0 < a1; }

std::string span_name(const GoldSpan& g) {
  return "[" + std::to_string(g.char_start) + ", " + std::to_string(g.char_end) + ")";
}

}  // namespace

Alignment align_gold(const Document& doc, const std::vector<GoldSpan>& spans,
                     const TaskSchema& schema) {
  Alignment out;
  out.tags.resize(doc.sentences.size());
  for (size_t s = 0; s < doc.sentences.size(); ++s)
    out.tags[s].assign(doc.sentences[s].tokens.size(), schema.default_class);

  for (size_t i = 0; i < spans.size(); ++i) {
    const GoldSpan& a = spans[i];
    if (a.doc_id != doc.id)
      throw Error("gold span " + span_name(a) + " belongs to '" + a.doc_id + "', not '" + doc.id +
                  "'");
    if (!schema.valid_class(a.class_label))
      throw Error("gold span " + span_name(a) + " has invalid class " +
                  std::to_string(a.class_label));
    if (a.char_start >= a.char_end || a.char_end > doc.text.size())
      throw Error("gold span " + span_name(a) + " out of range for '" + doc.id + "'");
    for (size_t j = i + 1; j < spans.size(); ++j) {
      const GoldSpan& b = spans[j];
      if (overlaps(a.char_start, a.char_end, b.char_start, b.char_end) &&
          a.class_label != b.class_label)
        throw Error("overlapping gold spans " + span_name(a) + " and " + span_name(b) +
                    " have different classes in '" + doc.id + "'");
    }
  }

  // Owner class per token, to catch two spans expanded onto one token.
  std::vector<std::vector<int>> owner(out.tags.size());
  for (size_t s = 0; s < out.tags.size(); ++s) owner[s].assign(out.tags[s].size(), kAbstain);

  for (const GoldSpan& g : spans) {
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      const auto& toks = doc.sentences[s].tokens;
      for (size_t t = 0; t < toks.size(); ++t) {
        const Token& tok = toks[t];
        if (!overlaps(tok.char_start, tok.char_end, g.char_start, g.char_end)) continue;
        if (tok.char_start < g.char_start || tok.char_end > g.char_end)
          out.warnings.push_back("gold span " + span_name(g) + " in '" + doc.id +
                                 "' partially covers token '" + tok.text + "' [" +
                                 std::to_string(tok.char_start) + ", " +
                                 std::to_string(tok.char_end) + "); expanded to the token");
        if (owner[s][t] != kAbstain && owner[s][t] != g.class_label)
          throw Error("gold spans of different classes meet on token '" + tok.text + "' in '" +
                      doc.id + "'");
        owner[s][t] = g.class_label;
        out.tags[s][t] = g.class_label;
      }
    }
  }
  return out;
}

std::vector<Entity> gold_entities(const Document& doc, const std::vector<GoldSpan>& spans,
                                  Warnings* warnings) {
  std::vector<Entity> out;
  for (const GoldSpan& g : spans) {
    bool found = false;
    for (size_t s = 0; s < doc.sentences.size() && !found; ++s) {
      const auto& toks = doc.sentences[s].tokens;
      size_t b = toks.size(), e = 0;
      for (size_t t = 0; t < toks.size(); ++t) {
        if (overlaps(toks[t].char_start, toks[t].char_end, g.char_start, g.char_end)) {
          b = std::min(b, t);
          e = t + 1;
        }
      }
      if (b < e) {
        out.push_back({{s, b, e}, g.class_label});
        found = true;
      }
    }
    if (!found && warnings)
      warnings->push_back("gold span " + span_name(g) + " in '" + doc.id + "' covers no token");
  }
  return out;
}

}  // namespace wsner
