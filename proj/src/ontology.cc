#include "wsner/ontology.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wsner/kernels.h"
#include "wsner/text.h"

namespace wsner {

namespace {

std::string line_error(const std::string& source, size_t line_no, const std::string& msg) {
  return source + ":" + std::to_string(line_no) + ": " + msg;
}

// Splits a two-field tab-separated line; throws with the line number.
std::pair<std::string, std::string> two_fields(const std::string& line, const std::string& source,
                                               size_t line_no, const char* first,
                                               const char* second) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos)
    throw Error(line_error(source, line_no, std::string("expected '") + first + "\\t" + second + "'"));
  const auto a = text::trim(std::string_view(line).substr(0, tab));
  const auto b = text::trim(std::string_view(line).substr(tab + 1));
  if (a.empty()) throw Error(line_error(source, line_no, std::string("missing ") + first));
  if (b.empty()) throw Error(line_error(source, line_no, std::string("missing ") + second));
  if (b.find('\t') != std::string_view::npos)
    throw Error(line_error(source, line_no, "too many fields"));
  return {std::string(a), std::string(b)};
}

}  // namespace

Terminology load_terminology(std::istream& in, const std::string& name) {
  Terminology t;
  t.name = name;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    auto [term, sty] = two_fields(line, name, line_no, "term", "semantic_type");
    t.entries[term].insert(sty);
  }
  if (t.entries.empty()) throw Error("terminology '" + name + "' is empty");
  return t;
}

Terminology load_terminology(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open terminology file '" + path + "'");
  return load_terminology(in, name);
}

std::optional<std::string> preprocess_term(std::string_view raw, const StopwordSet& stopwords) {
  const auto term = text::trim(raw);
  if (term.empty()) return std::nullopt;
  if (text::codepoint_length(term) <= 1) return std::nullopt;
  if (text::is_number(term)) return std::nullopt;
  if (stopwords.count(text::lower(term))) return std::nullopt;
  return normalize_case(term);
}

Terminology preprocess_terms(const Terminology& t, const StopwordSet& stopwords) {
  Terminology out;
  out.name = t.name;
  for (const auto& [term, types] : t.entries) {
    auto norm = preprocess_term(term, stopwords);
    if (!norm) continue;
    out.entries[*norm].insert(types.begin(), types.end());
  }
  return out;
}

int ClassMap::lookup(const std::string& semantic_type) const {
  auto it = mapping.find(semantic_type);
  if (it != mapping.end()) return it->second;
  if (fallback) return *fallback;
  throw Error("semantic type '" + semantic_type + "' has no class mapping");
}

ClassMap parse_class_map(const std::string& json_text, const TaskSchema& schema) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("class map: malformed JSON (") + e.what() + ")");
  }
  if (!j.is_object()) throw Error("class map: expected a JSON object");
  ClassMap cm;
  for (auto it = j.begin(); it != j.end(); ++it) {
    int cls;
    const auto& v = it.value();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      cls = (s == "abstain") ? kAbstain : schema.class_index(s);
    } else if (v.is_number_integer()) {
      cls = v.get<int>();
      if (cls != kAbstain && !schema.valid_class(cls))
        throw Error("class map: type '" + it.key() + "' maps to invalid class " + std::to_string(cls));
    } else {
      throw Error("class map: type '" + it.key() + "' must map to a class name, integer or \"abstain\"");
    }
    if (it.key() == "*")
      cm.fallback = cls;
    else
      cm.mapping[it.key()] = cls;
  }
  return cm;
}

ClassMap load_class_map(const std::string& path, const TaskSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open class map '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_class_map(ss.str(), schema);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

TermClassMap build_term_class_map(const std::vector<Terminology>& ts, const ClassMap& cm,
                                  const TaskSchema& schema) {
  // key -> (display term for token length, pooled types)
  std::map<std::string, std::pair<std::string, std::set<std::string>>> pooled;
  for (const auto& t : ts)
    for (const auto& [term, types] : t.entries) {
      auto& slot = pooled[term_key(term)];
      if (slot.first.empty()) slot.first = term;
      slot.second.insert(types.begin(), types.end());
    }

  TermClassMap out;
  for (const auto& [key, entry] : pooled) {
    ClassVector v(static_cast<size_t>(schema.k), 0.0);
    size_t mapped = 0;
    for (const auto& sty : entry.second) {
      const int c = cm.lookup(sty);
      if (c == kAbstain) continue;
      v[static_cast<size_t>(c)] += 1.0;
      ++mapped;
    }
    if (!mapped) continue;
    for (double& p : v) p /= static_cast<double>(mapped);
    out.insert(key, std::move(v), term_token_length(entry.first));
  }
  return out;
}

int argmax_or_abstain(const ClassVector& v) {
  int best = kAbstain;
  double best_p = -1.0;
  bool tie = false;
  for (size_t c = 0; c < v.size(); ++c) {
    if (v[c] > best_p) {
      best_p = v[c];
      best = static_cast<int>(c);
      tie = false;
    } else if (v[c] == best_p) {
      tie = true;
    }
  }
  return tie ? kAbstain : best;
}

SynsetIndex build_synsets(std::istream& in, const StopwordSet& stopwords) {
  std::map<std::string, std::set<std::string>> raw;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    auto [id, term] = two_fields(line, "synsets", line_no, "synset_id", "term");
    auto norm = preprocess_term(term, stopwords);
    if (norm) raw[id].insert(term_key(*norm));
  }
  SynsetIndex out;
  for (auto& [id, terms] : raw) {
    if (terms.size() < 2) continue;
    for (const auto& t : terms) out.term_ids[t].insert(id);
    out.synsets.emplace(id, std::move(terms));
  }
  return out;
}

SynsetIndex build_synsets(const std::string& path, const StopwordSet& stopwords) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open synset file '" + path + "'");
  try {
    return build_synsets(in, stopwords);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::vector<size_t> terminology_coverage(const std::vector<Terminology>& ts, const Corpus& corpus) {
  std::vector<TermSet> dicts(ts.size());
  for (size_t i = 0; i < ts.size(); ++i)
    for (const auto& [term, _] : ts[i].entries) dicts[i].insert(term_key(term), 0, term_token_length(term));
  return kernels::document_frequency(dicts, corpus);
}

PartitionPlan rank_and_partition(const std::vector<Terminology>& ts, const Corpus& corpus,
                                 size_t s) {
  if (ts.empty()) throw Error("partition: no terminologies");
  if (s < 1 || s > ts.size())
    throw Error("partition: s=" + std::to_string(s) + " outside 1.." + std::to_string(ts.size()));
  if (corpus.documents.empty()) throw Error("partition: empty corpus");

  const auto coverage = terminology_coverage(ts, corpus);
  std::vector<size_t> order(ts.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (coverage[a] != coverage[b]) return coverage[a] > coverage[b];
    return ts[a].name < ts[b].name;
  });

  PartitionPlan plan;
  plan.s = s;
  plan.tail_merged.name = "merged_tail";
  for (size_t r = 0; r < order.size(); ++r) {
    const auto& t = ts[order[r]];
    plan.ranked.push_back({t.name, coverage[order[r]]});
    if (r < s) {
      plan.head.push_back(t);
    } else {
      for (const auto& [term, types] : t.entries)
        plan.tail_merged.entries[term].insert(types.begin(), types.end());
    }
  }
  return plan;
}

}  // namespace wsner
