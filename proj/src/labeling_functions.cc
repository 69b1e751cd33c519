#include <exception>

#include "labelers_internal.h"
#include "wsner/text.h"

namespace wsner {

std::string_view to_string(LfKind kind) {
  switch (kind) {
    case LfKind::kSemanticType: return "semantic_type";
    case LfKind::kSynset: return "synset";
    case LfKind::kPattern: return "pattern";
    case LfKind::kGuidelineDict: return "guideline_dict";
    case LfKind::kCueWindow: return "cue_window";
    case LfKind::kNearestDatetime: return "nearest_datetime";
  }
  return "unknown";
}

LfKind parse_lf_kind(std::string_view s) {
  for (LfKind k : {LfKind::kSemanticType, LfKind::kSynset, LfKind::kPattern, LfKind::kGuidelineDict,
                   LfKind::kCueWindow, LfKind::kNearestDatetime})
    if (to_string(k) == s) return k;
  throw Error("unknown labeling function kind '" + std::string(s) + "'");
}

namespace {

// Base for functions that vote sentence by sentence.
class SentenceLf : public LabelingFunction {
 public:
  using LabelingFunction::LabelingFunction;
  DocumentVotes apply(const Document& doc, std::span<const TokenSpan>) const final {
    DocumentVotes out;
    out.reserve(doc.sentences.size());
    for (const auto& s : doc.sentences) out.push_back(apply_sentence(doc, s));
    return out;
  }
  virtual SentenceVotes apply_sentence(const Document& doc, const Sentence& s) const = 0;
};

// Base for functions that vote once per entity; votes land on head tokens.
class EntityLf : public LabelingFunction {
 public:
  using LabelingFunction::LabelingFunction;
  DocumentVotes apply(const Document& doc, std::span<const TokenSpan> entities) const final {
    DocumentVotes out(doc.sentences.size());
    for (size_t s = 0; s < doc.sentences.size(); ++s)
      out[s].assign(doc.sentences[s].tokens.size(), kAbstain);
    const auto votes = apply_entities(doc, entities);
    for (size_t i = 0; i < entities.size(); ++i)
      if (votes[i] != kAbstain) out[entities[i].sentence][entities[i].begin] = votes[i];
    return out;
  }
  virtual std::vector<int> apply_entities(const Document& doc,
                                          std::span<const TokenSpan> entities) const = 0;
};

class SemanticTypeLf final : public SentenceLf {
 public:
  SemanticTypeLf(std::string name, std::shared_ptr<const TermClassMap> tcm,
                 std::vector<SlotPattern> slots)
      : SentenceLf(std::move(name)), tcm_(std::move(tcm)), slots_(std::move(slots)) {}
  LfKind kind() const override { return LfKind::kSemanticType; }
  SentenceVotes apply_sentence(const Document&, const Sentence& s) const override {
    return apply_semantic_type_lf(*tcm_, s, slots_);
  }

 private:
  std::shared_ptr<const TermClassMap> tcm_;
  std::vector<SlotPattern> slots_;
};

class SynsetLf final : public LabelingFunction {
 public:
  SynsetLf(std::string name, std::shared_ptr<const SynsetIndex> syn,
           std::shared_ptr<const TermClassMap> tcm, SynsetMode mode)
      : LabelingFunction(std::move(name)), labeler_(std::move(syn), std::move(tcm)), mode_(mode) {}
  LfKind kind() const override { return LfKind::kSynset; }
  DocumentVotes apply(const Document& doc, std::span<const TokenSpan>) const override {
    return mode_ == SynsetMode::kAnyPair ? labeler_.apply_any_pair(doc)
                                         : labeler_.apply_schwartz_hearst(doc);
  }

 private:
  internal::SynsetLabeler labeler_;
  SynsetMode mode_;
};

class PatternLf final : public SentenceLf {
 public:
  PatternLf(std::string name, PatternSet patterns, int label)
      : SentenceLf(std::move(name)), patterns_(std::move(patterns)), label_(label) {}
  LfKind kind() const override { return LfKind::kPattern; }
  SentenceVotes apply_sentence(const Document& doc, const Sentence& s) const override {
    return apply_pattern_lf(patterns_, label_, doc, s);
  }

 private:
  PatternSet patterns_;
  int label_;
};

class GuidelineLf final : public SentenceLf {
 public:
  GuidelineLf(std::string name, GuidelineDictionary dict)
      : SentenceLf(std::move(name)), dict_(std::move(dict)) {}
  LfKind kind() const override { return LfKind::kGuidelineDict; }
  SentenceVotes apply_sentence(const Document&, const Sentence& s) const override {
    return apply_guideline_dict_lf(dict_, s);
  }

 private:
  GuidelineDictionary dict_;
};

class CueWindowLf final : public EntityLf {
 public:
  CueWindowLf(std::string name, CueRule rule) : EntityLf(std::move(name)), rule_(std::move(rule)) {}
  LfKind kind() const override { return LfKind::kCueWindow; }
  std::vector<int> apply_entities(const Document& doc,
                                  std::span<const TokenSpan> entities) const override {
    return apply_cue_window_lf(rule_, doc, entities);
  }

 private:
  CueMatcher rule_;
};

class NearestDatetimeLf final : public EntityLf {
 public:
  NearestDatetimeLf(std::string name, DatetimeRule rule)
      : EntityLf(std::move(name)), rule_(std::move(rule)) {}
  LfKind kind() const override { return LfKind::kNearestDatetime; }
  std::vector<int> apply_entities(const Document& doc,
                                  std::span<const TokenSpan> entities) const override {
    return apply_nearest_datetime_lf(rule_, doc, entities);
  }

 private:
  DatetimeMatcher rule_;
};

}  // namespace

LfPtr make_semantic_type_lf(std::string name, std::shared_ptr<const TermClassMap> tcm,
                            std::vector<SlotPattern> slot_patterns) {
  return std::make_shared<SemanticTypeLf>(std::move(name), std::move(tcm), std::move(slot_patterns));
}
LfPtr make_synset_lf(std::string name, std::shared_ptr<const SynsetIndex> syn,
                     std::shared_ptr<const TermClassMap> tcm, SynsetMode mode) {
  return std::make_shared<SynsetLf>(std::move(name), std::move(syn), std::move(tcm), mode);
}
LfPtr make_pattern_lf(std::string name, PatternSet patterns, int label) {
  return std::make_shared<PatternLf>(std::move(name), std::move(patterns), label);
}
LfPtr make_guideline_dict_lf(std::string name, GuidelineDictionary dict) {
  return std::make_shared<GuidelineLf>(std::move(name), std::move(dict));
}
LfPtr make_cue_window_lf(std::string name, CueRule rule) {
  return std::make_shared<CueWindowLf>(std::move(name), std::move(rule));
}
LfPtr make_nearest_datetime_lf(std::string name, DatetimeRule rule) {
  return std::make_shared<NearestDatetimeLf>(std::move(name), std::move(rule));
}

EntityIndex entities_from_gold(const Corpus& corpus, Warnings* warnings) {
  EntityIndex out(corpus.documents.size());
  std::unordered_map<std::string, std::vector<GoldSpan>> by_doc;
  for (const auto& g : corpus.gold) by_doc[g.doc_id].push_back(g);
  for (size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& doc = corpus.documents[d];
    auto it = by_doc.find(doc.id);
    if (it == by_doc.end()) continue;
    for (const auto& e : gold_entities(doc, it->second, warnings)) out[d].push_back(e.span);
  }
  return out;
}

namespace {

void label_document(const Corpus& corpus, size_t d, std::span<const LfPtr> lfs,
                    const TaskSchema& schema, const EntityIndex* entities, size_t row0,
                    LabelMatrix& L) {
  const Document& doc = corpus.documents[d];
  const std::span<const TokenSpan> ents =
      entities ? std::span<const TokenSpan>((*entities)[d]) : std::span<const TokenSpan>();
  for (size_t j = 0; j < lfs.size(); ++j) {
    const DocumentVotes votes = lfs[j]->apply(doc, ents);
    if (votes.size() != doc.sentences.size())
      throw Error("labeling function '" + lfs[j]->name() + "' returned " +
                  std::to_string(votes.size()) + " sentences for document '" + doc.id +
                  "' (expected " + std::to_string(doc.sentences.size()) + ")");
    size_t row = row0;
    for (size_t s = 0; s < votes.size(); ++s) {
      const size_t expected = doc.sentences[s].tokens.size();
      if (votes[s].size() != expected)
        throw Error("labeling function '" + lfs[j]->name() + "' returned " +
                    std::to_string(votes[s].size()) + " votes for sentence " + std::to_string(s) +
                    " of document '" + doc.id + "' (expected " + std::to_string(expected) + ")");
      for (int v : votes[s]) {
        if (v != kAbstain && !schema.valid_class(v))
          throw Error("labeling function '" + lfs[j]->name() + "' emitted vote " +
                      std::to_string(v) + " outside the label domain in document '" + doc.id + "'");
        L.values[row * L.m + j] = static_cast<int8_t>(v);
        ++row;
      }
    }
  }
}

LabelMatrix prepare(const Corpus& corpus, std::span<const LfPtr> lfs, const TaskSchema& schema,
                    const EntityIndex* entities) {
  schema.validate();
  if (lfs.empty()) throw Error("build_label_matrix: no labeling functions");
  if (schema.k > 127) throw Error("build_label_matrix: k must fit in a signed byte");
  if (entities && entities->size() != corpus.documents.size())
    throw Error("build_label_matrix: entity index does not match the corpus");
  std::vector<std::string> names;
  for (const auto& lf : lfs) names.push_back(lf->name());
  return LabelMatrix::for_corpus(corpus, std::move(names));
}

std::vector<size_t> document_row_offsets(const Corpus& corpus) {
  std::vector<size_t> out(corpus.documents.size());
  size_t row = 0;
  for (size_t d = 0; d < corpus.documents.size(); ++d) {
    out[d] = row;
    row += corpus.documents[d].token_count();
  }
  return out;
}

}  // namespace

LabelMatrix build_label_matrix(const Corpus& corpus, std::span<const LfPtr> lfs,
                               const TaskSchema& schema, const EntityIndex* entities) {
  LabelMatrix L = prepare(corpus, lfs, schema, entities);
  const auto offsets = document_row_offsets(corpus);
  const auto docs = static_cast<std::ptrdiff_t>(corpus.documents.size());
  // Report the error of the lowest failing document so messages are stable.
  std::vector<std::exception_ptr> errors(corpus.documents.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t d = 0; d < docs; ++d) {
    const auto ud = static_cast<size_t>(d);
    try {
      label_document(corpus, ud, lfs, schema, entities, offsets[ud], L);
    } catch (...) {
      errors[ud] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return L;
}

LabelMatrix build_label_matrix_serial(const Corpus& corpus, std::span<const LfPtr> lfs,
                                      const TaskSchema& schema, const EntityIndex* entities) {
  LabelMatrix L = prepare(corpus, lfs, schema, entities);
  const auto offsets = document_row_offsets(corpus);
  for (size_t d = 0; d < corpus.documents.size(); ++d)
    label_document(corpus, d, lfs, schema, entities, offsets[d], L);
  return L;
}

}  // namespace wsner
