#include "wsner/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>

#include "wsner/text.h"

namespace wsner {

Resources load_resources(const PipelineConfig& cfg) {
  Resources r;
  r.stopwords = cfg.stopwords_path ? load_stopwords(*cfg.stopwords_path) : default_stopwords();
  for (const auto& ref : cfg.terminologies)
    r.terminologies.push_back(preprocess_terms(load_terminology(ref.path, ref.name), r.stopwords));
  if (cfg.class_map_path)
    r.class_map = load_class_map(*cfg.class_map_path, cfg.schema);
  else if (!cfg.class_map_inline.empty())
    r.class_map = parse_class_map(cfg.class_map_inline, cfg.schema);
  if (!r.terminologies.empty() && (cfg.class_map_path || !cfg.class_map_inline.empty()))
    r.pooled = std::make_shared<const TermClassMap>(build_term_class_map(r.terminologies, r.class_map, cfg.schema));
  // Synset files are pooled into one index.
  auto syn = std::make_shared<SynsetIndex>();
  for (const auto& p : cfg.synset_paths) {
    const SynsetIndex part = build_synsets(p, r.stopwords);
    for (const auto& [id, members] : part.synsets)
      syn->synsets[id].insert(members.begin(), members.end());
  }
  for (const auto& [id, members] : syn->synsets)
    for (const auto& m : members) syn->term_ids[m].insert(id);
  r.synsets = std::move(syn);
  return r;
}

Splits load_splits(const PipelineConfig& cfg) {
  Splits s;
  s.train = ingest_corpus(cfg.train_path, cfg.schema);
  if (!cfg.validation_path.empty()) {
    s.validation = ingest_corpus(cfg.validation_path, cfg.schema);
    s.has_validation = true;
  }
  if (!cfg.test_path.empty()) {
    s.test = ingest_corpus(cfg.test_path, cfg.schema);
    s.has_test = true;
  }
  return s;
}

LfSet build_labeling_functions(const PipelineConfig& cfg, const Resources& res,
                               const Corpus& rank_corpus, size_t s) {
  LfSet out;
  std::set<std::string> names;
  auto add = [&](LfPtr lf) {
    if (!names.insert(lf->name()).second)
      throw Error("duplicate labeling function name '" + lf->name() + "'");
    out.lfs.push_back(std::move(lf));
  };
  for (const LfSpec& spec : cfg.lfs) {
    if (spec.tier > cfg.tier) continue;
    switch (spec.kind) {
      case LfKind::kSemanticType: {
        std::vector<SlotPattern> slots;
        if (spec.default_slot_patterns)
          slots = default_slot_patterns();
        else
          for (const auto& p : spec.slot_patterns) slots.push_back(parse_slot_pattern(p));
        const std::string prefix = spec.name.empty() ? "st" : spec.name;
        auto make = [&](const Terminology& t) {
          auto tcm = std::make_shared<const TermClassMap>(build_term_class_map({t}, res.class_map, cfg.schema));
          add(make_semantic_type_lf(prefix + ":" + t.name, tcm, slots));
        };
        if (spec.terminologies == "partition") {
          if (s < 1 || s > res.terminologies.size())
            throw Error("partition s=" + std::to_string(s) + " outside 1.." +
                        std::to_string(res.terminologies.size()));
          PartitionPlan plan = rank_and_partition(res.terminologies, rank_corpus, s);
          for (const auto& t : plan.head) make(t);
          if (plan.has_tail()) make(plan.tail_merged);
          out.plan = std::move(plan);
        } else {
          for (const auto& t : res.terminologies)
            if (t.name == spec.terminologies) make(t);
        }
        break;
      }
      case LfKind::kSynset:
        add(make_synset_lf(spec.name, res.synsets, res.pooled, spec.synset_mode));
        break;
      case LfKind::kPattern:
        add(make_pattern_lf(spec.name, PatternSet(spec.patterns, spec.ignore_case), spec.label));
        break;
      case LfKind::kGuidelineDict: {
        auto dict = GuidelineDictionary::build(spec.positive, spec.negative, spec.label,
                                               cfg.schema.default_class, res.stopwords);
        dict.vote_stopwords = spec.vote_stopwords;
        dict.vote_numbers = spec.vote_numbers;
        dict.vote_punctuation = spec.vote_punctuation;
        add(make_guideline_dict_lf(spec.name, std::move(dict)));
        break;
      }
      case LfKind::kCueWindow:
        add(make_cue_window_lf(spec.name, spec.cue));
        break;
      case LfKind::kNearestDatetime:
        add(make_nearest_datetime_lf(spec.name, spec.datetime));
        break;
    }
  }
  if (out.lfs.empty()) throw Error("no labeling functions at tier " + std::to_string(cfg.tier));
  return out;
}

LabelMatrix label_split(const PipelineConfig& cfg, const LfSet& lfs, const Corpus& corpus) {
  if (!cfg.span_task) return build_label_matrix(corpus, lfs.lfs, cfg.schema);
  const EntityIndex entities = entities_from_gold(corpus);
  return build_label_matrix(corpus, lfs.lfs, cfg.schema, &entities);
}

std::vector<int> gold_tags(const Corpus& corpus, const TaskSchema& schema, Warnings* warnings) {
  std::unordered_map<std::string, std::vector<GoldSpan>> by_doc;
  for (const auto& g : corpus.gold) by_doc[g.doc_id].push_back(g);
  std::vector<int> out;
  out.reserve(corpus.token_count());
  static const std::vector<GoldSpan> none;
  for (const auto& doc : corpus.documents) {
    auto it = by_doc.find(doc.id);
    const Alignment a = align_gold(doc, it == by_doc.end() ? none : it->second, schema);
    if (warnings) warnings->insert(warnings->end(), a.warnings.begin(), a.warnings.end());
    for (const auto& s : a.tags) out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

EvalReport evaluate_tags(const PipelineConfig& cfg, const Corpus& corpus, std::span<const int> pred,
                         std::span<const int> gold) {
  if (pred.size() != gold.size() || pred.size() != corpus.token_count())
    throw Error("evaluation: prediction, gold and corpus lengths differ");
  const int def = cfg.schema.default_class;
  if (!cfg.span_task) {
    const auto rows = corpus.rows();
    const auto p = spans_from_rows(pred, rows, def);
    const auto g = spans_from_rows(gold, rows, def);
    return span_prf(p, g, MatchMode::kExactSpan);
  }
  // Span tasks: the class of each gold entity is read off its head token.
  const auto offsets = corpus.sentence_offsets();
  const EntityIndex entities = entities_from_gold(corpus);
  std::vector<Span> p, g;
  for (size_t d = 0; d < entities.size(); ++d)
    for (const auto& e : entities[d]) {
      const size_t row = offsets[d][e.sentence] + e.begin;
      if (pred[row] != def) p.push_back({row, row + 1, pred[row]});
      if (gold[row] != def) g.push_back({row, row + 1, gold[row]});
    }
  return span_prf(p, g, MatchMode::kTokenMicro);
}

std::vector<SweepRow> sweep_partitions(const PipelineConfig& cfg, const Resources& res,
                                       const Splits& splits, std::span<const size_t> s_values,
                                       uint64_t seed) {
  if (s_values.empty()) throw Error("sweep: no s values");
  for (size_t s : s_values)
    if (s < 1 || s > res.terminologies.size())
      throw Error("sweep: s=" + std::to_string(s) + " outside 1.." + std::to_string(res.terminologies.size()));
  const Corpus& eval_corpus = splits.has_validation ? splits.validation : splits.train;
  const auto gold = gold_tags(eval_corpus, cfg.schema);
  LabelModelConfig lm = cfg.label_model;
  lm.seed = seed;
  std::vector<SweepRow> rows;
  for (size_t s : s_values) {
    const LfSet lfs = build_labeling_functions(cfg, res, splits.train, s);
    const LabelMatrix Ltrain = label_split(cfg, lfs, splits.train);
    const LabelMatrix Leval = label_split(cfg, lfs, eval_corpus);
    const auto params = fit_label_model(Ltrain, lm, cfg.schema);
    const auto mv = majority_vote(Leval, cfg.schema);
    const auto lmh = lm_hard_labels(predict_proba(Leval, params, cfg.schema), cfg.schema);
    rows.push_back({s, evaluate_tags(cfg, eval_corpus, mv, gold).f1(),
                    evaluate_tags(cfg, eval_corpus, lmh, gold).f1()});
  }
  return rows;
}

std::string format_sweep(std::span<const SweepRow> rows) {
  std::string out = "s\tmv_f1\tlm_f1\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6f\n", r.s, r.mv_f1, r.lm_f1);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string regex_escape(std::string_view s) {
  static const std::string special = "\\^$.|?*+()[]{}";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string::npos) out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string search_corpus(const Corpus& corpus, const SearchQuery& q, const TaskSchema& schema,
                          std::span<const LfPtr> lfs, const EntityIndex* entities) {
  std::regex re;
  try {
    re = std::regex(q.phrase ? regex_escape(q.pattern) : q.pattern,
                    std::regex::ECMAScript | std::regex::icase);
  } catch (const std::regex_error& e) {
    throw Error("search: invalid pattern '" + q.pattern + "': " + e.what());
  }
  std::vector<LfPtr> shown;
  for (const auto& lf : lfs)
    if (q.highlight.empty() || std::find(q.highlight.begin(), q.highlight.end(), lf->name()) != q.highlight.end())
      shown.push_back(lf);
  for (const auto& h : q.highlight) {
    bool found = false;
    for (const auto& lf : lfs) found |= lf->name() == h;
    if (!found && !lfs.empty()) throw Error("search: unknown labeling function '" + h + "'");
  }
  size_t width = 0;
  for (const auto& lf : shown) width = std::max(width, lf->name().size());

  std::string out;
  for (size_t d = 0; d < corpus.documents.size(); ++d) {
    const Document& doc = corpus.documents[d];
    std::vector<DocumentVotes> votes;
    bool computed = false;
    for (size_t si = 0; si < doc.sentences.size(); ++si) {
      const auto& toks = doc.sentences[si].tokens;
      if (toks.empty()) continue;
      const size_t base = toks.front().char_start;
      const std::string sent = doc.text.substr(base, toks.back().char_end - base);
      for (auto it = std::sregex_iterator(sent.begin(), sent.end(), re); it != std::sregex_iterator(); ++it) {
        if (it->length() == 0) continue;
        const size_t mb = base + static_cast<size_t>(it->position());
        const size_t me = mb + static_cast<size_t>(it->length());
        size_t tb = toks.size(), te = 0;
        for (size_t t = 0; t < toks.size(); ++t)
          if (toks[t].char_start < me && mb < toks[t].char_end) {
            tb = std::min(tb, t);
            te = t + 1;
          }
        if (tb >= te) continue;
        // phrases match whole tokens only
        if (q.phrase && (toks[tb].char_start != mb || toks[te - 1].char_end != me)) continue;
        const size_t lo = tb > q.window ? tb - q.window : 0;
        const size_t hi = std::min(toks.size(), te + q.window);
        out += doc.id + "\t" + std::to_string(si) + "\t" + std::to_string(tb) + "-" + std::to_string(te) + "\t";
        for (size_t t = lo; t < hi; ++t) {
          if (t > lo) out += ' ';
          if (t == tb) out += "[[";
          out += toks[t].text;
          if (t + 1 == te) out += "]]";
        }
        out += '\n';
        if (shown.empty()) continue;
        if (!computed) {
          const std::span<const TokenSpan> ents =
              entities ? std::span<const TokenSpan>((*entities)[d]) : std::span<const TokenSpan>();
          for (const auto& lf : shown) votes.push_back(lf->apply(doc, ents));
          computed = true;
        }
        for (size_t f = 0; f < shown.size(); ++f) {
          std::string line = "  " + shown[f]->name() + std::string(width - shown[f]->name().size(), ' ') + " ";
          for (size_t t = lo; t < hi; ++t) {
            if (t > lo) line += ' ';
            const int v = votes[f][si][t];
            line += v == kAbstain ? "·" : schema.name(v);
          }
          out += line + '\n';
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {
std::string hex(const unsigned char* md, unsigned len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += digits[md[i] >> 4];
    out += digits[md[i] & 15];
  }
  return out;
}
}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
    throw Error("sha256 failed");
  return hex(md, len);
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || !EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr)) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  return hex(md, len);
}

}  // namespace wsner
