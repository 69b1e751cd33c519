#include "wsner/synthetic.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "wsner/ontology.h"
#include "wsner/random.h"
#include "wsner/text.h"

namespace wsner {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::vector<std::vector<std::string>>& class_suffixes() {
  static const std::vector<std::vector<std::string>> s = {
      {"itis", "osis", "emia", "oma"},
      {"ine", "ide", "ate", "ol"},
      {"ectomy", "otomy", "plasty"},
      {"ase", "ogen", "yme"},
  };
  return s;
}

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string syllables(Rng& rng, size_t n) {
  std::string w;
  for (size_t i = 0; i < n; ++i) {
    w += kConsonants[rng.below(kConsonants.size())];
    w += kVowels[rng.below(kVowels.size())];
  }
  return w;
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

bool has_class_suffix(std::string_view w) {
  for (const auto& list : class_suffixes())
    for (const auto& s : list)
      if (ends_with(w, s)) return true;
  return false;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_docs < 1 || sentences_per_doc < 1) throw Error("synthetic: document counts must be positive");
  if (min_sentence_len < 1 || max_sentence_len < min_sentence_len)
    throw Error("synthetic: bad sentence length range");
  if (!(entity_rate >= 0.0 && entity_rate < 1.0)) throw Error("synthetic: entity_rate must lie in [0, 1)");
  if (!(mean_entity_len >= 1.0)) throw Error("synthetic: mean_entity_len must be >= 1");
  if (k < 2 || static_cast<size_t>(k) > class_suffixes().size() + 1)
    throw Error("synthetic: k must lie in 2.." + std::to_string(class_suffixes().size() + 1));
  if (!(ood_fraction >= 0.0 && ood_fraction < 1.0)) throw Error("synthetic: ood_fraction must lie in [0, 1)");
  if (vocabulary_size < 10 || forms_per_class < 5) throw Error("synthetic: lexicon too small");
  const double p_out = 1.0 / mean_entity_len;
  if (entity_rate * p_out / (1.0 - entity_rate) > 1.0)
    throw Error("synthetic: entity_rate too high for the mean entity length");
}

SyntheticTask generate_corpus(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SyntheticTask task;
  task.seed = cfg.seed;
  task.schema.k = cfg.k;
  task.schema.class_names = {"O"};
  for (int c = 1; c < cfg.k; ++c) task.schema.class_names.push_back("C" + std::to_string(c));
  if (cfg.k == 2) task.schema.class_names[1] = "ENTITY";
  task.schema.default_class = 0;

  std::set<std::string> used;
  const auto& stop = default_stopwords();
  while (task.vocabulary.size() < cfg.vocabulary_size) {
    std::string w = syllables(rng, 2 + rng.below(2));
    if (has_class_suffix(w) || stop.count(w) || !used.insert(w).second) continue;
    task.vocabulary.push_back(std::move(w));
  }
  std::vector<std::vector<size_t>> forms_by_class(static_cast<size_t>(cfg.k));
  for (int c = 1; c < cfg.k; ++c) {
    const auto& suffixes = class_suffixes()[static_cast<size_t>(c - 1)];
    size_t made = 0;
    while (made < cfg.forms_per_class) {
      std::string w = syllables(rng, 2) + suffixes[rng.below(suffixes.size())];
      if (!used.insert(w).second) continue;
      forms_by_class[static_cast<size_t>(c)].push_back(task.lexicon.size());
      task.lexicon.push_back({std::move(w), c, false});
      ++made;
    }
    // Flag an exact share of each class as out-of-dictionary.
    auto ids = forms_by_class[static_cast<size_t>(c)];
    rng.shuffle(ids);
    const auto n_ood = static_cast<size_t>(std::llround(cfg.ood_fraction * static_cast<double>(ids.size())));
    for (size_t i = 0; i < n_ood; ++i) task.lexicon[ids[i]].out_of_dictionary = true;
  }

  const double p_out = 1.0 / cfg.mean_entity_len;
  const double p_in = cfg.entity_rate * p_out / (1.0 - cfg.entity_rate);
  for (size_t d = 0; d < cfg.n_docs; ++d) {
    Document doc;
    char id[32];
    std::snprintf(id, sizeof id, "doc%05zu", d);
    doc.id = id;
    for (size_t s = 0; s < cfg.sentences_per_doc; ++s) {
      const size_t len = cfg.min_sentence_len + rng.below(cfg.max_sentence_len - cfg.min_sentence_len + 1);
      int cls = rng.bernoulli(cfg.entity_rate) ? 1 + static_cast<int>(rng.below(static_cast<uint64_t>(cfg.k - 1))) : 0;
      std::optional<GoldSpan> open;
      for (size_t t = 0; t < len; ++t) {
        if (t > 0) {
          if (cls == 0) {
            if (rng.bernoulli(p_in)) cls = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(cfg.k - 1)));
          } else if (rng.bernoulli(p_out)) {
            cls = 0;
          }
        }
        std::string w;
        if (cls == 0) {
          w = task.vocabulary[rng.below(task.vocabulary.size())];
        } else {
          const auto& ids = forms_by_class[static_cast<size_t>(cls)];
          w = task.lexicon[ids[rng.below(ids.size())]].text;
        }
        if (t == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
        if (!doc.text.empty()) doc.text += ' ';
        const size_t start = doc.text.size();
        doc.text += w;
        if (cls != 0 && open && open->class_label == cls) {
          open->char_end = doc.text.size();
        } else {
          if (open) task.corpus.gold.push_back(*open);
          open.reset();
          if (cls != 0) open = GoldSpan{doc.id, start, doc.text.size(), cls};
        }
        task.tags.push_back(cls);
      }
      if (open) task.corpus.gold.push_back(*open);
      doc.text += " .";
      task.tags.push_back(0);
      cls = 0;
    }
    doc.sentences = tokenize(doc.text);
    task.corpus.documents.push_back(std::move(doc));
  }
  return task;
}

void SourceSpec::validate(size_t index) const {
  const std::string where = "source " + std::to_string(index) + ": ";
  if (!(accuracy > 0.0 && accuracy <= 1.0)) throw Error(where + "accuracy must lie in (0, 1]");
  if (!(coverage > 0.0 && coverage <= 1.0)) throw Error(where + "coverage must lie in (0, 1]");
  if (copy_of >= static_cast<int>(index)) throw Error(where + "copy_of must name an earlier source");
  if (!(copy_probability >= 0.0 && copy_probability <= 1.0))
    throw Error(where + "copy_probability must lie in [0, 1]");
}

std::vector<int8_t> simulate_votes(std::span<const int> gold, int k, int default_class,
                                   std::span<const SourceSpec> specs, uint64_t seed) {
  if (specs.empty()) throw Error("simulate_sources: at least one source spec is required");
  if (k < 2 || k > 127) throw Error("simulate_sources: bad k");
  for (size_t j = 0; j < specs.size(); ++j) specs[j].validate(j);
  const size_t m = specs.size();
  std::vector<int8_t> out(gold.size() * m, static_cast<int8_t>(kAbstain));
  Rng rng(seed);
  for (size_t i = 0; i < gold.size(); ++i) {
    const int y = gold[i];
    if (y < 0 || y >= k) throw Error("simulate_sources: gold tag outside 0..k-1");
    for (size_t j = 0; j < m; ++j) {
      const SourceSpec& s = specs[j];
      int8_t& v = out[i * m + j];
      if (s.copy_of >= 0 && rng.bernoulli(s.copy_probability)) {
        v = out[i * m + static_cast<size_t>(s.copy_of)];
        continue;
      }
      if (!rng.bernoulli(s.coverage)) continue;
      if (rng.bernoulli(s.accuracy)) {
        v = static_cast<int8_t>(y);
      } else if (s.error_mode == ErrorMode::kSpanTruncate && y != default_class) {
        v = static_cast<int8_t>(default_class);
      } else {
        int w = static_cast<int>(rng.below(static_cast<uint64_t>(k - 1)));
        if (w >= y) ++w;
        v = static_cast<int8_t>(w);
      }
    }
  }
  return out;
}

LabelMatrix simulate_sources(const SyntheticTask& task, std::span<const SourceSpec> specs,
                             uint64_t seed) {
  std::vector<std::string> names;
  for (size_t j = 0; j < specs.size(); ++j) names.push_back("sim" + std::to_string(j));
  LabelMatrix L = LabelMatrix::for_corpus(task.corpus, std::move(names));
  if (L.n != task.tags.size()) throw Error("simulate_sources: task tags are not aligned with the corpus");
  L.values = simulate_votes(task.tags, task.schema.k, task.schema.default_class, specs, seed);
  return L;
}

TaskSplits split_corpus(const Corpus& corpus, double train_fraction, double validation_fraction) {
  const size_t n = corpus.documents.size();
  const auto n_train = static_cast<size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const auto n_val = static_cast<size_t>(std::llround(validation_fraction * static_cast<double>(n)));
  if (n_train + n_val > n) throw Error("split fractions exceed 1");
  TaskSplits out;
  std::map<std::string, Corpus*> owner;
  for (size_t d = 0; d < n; ++d) {
    Corpus* c = d < n_train ? &out.train : d < n_train + n_val ? &out.validation : &out.test;
    c->documents.push_back(corpus.documents[d]);
    owner[corpus.documents[d].id] = c;
  }
  for (const auto& g : corpus.gold) owner.at(g.doc_id)->gold.push_back(g);
  return out;
}

// ---------------------------------------------------------------------------
// Preset

namespace {

struct OntologySpec {
  const char* name;
  double entity_coverage;
  double background_coverage;
  double noise;
};

// Two reliable resources and eight small noisy ones, in no particular order.
constexpr OntologySpec kOntologies[] = {
    {"medlex", 0.55, 0.30, 0.03},   {"clinterm", 0.45, 0.25, 0.05},
    {"abbrevdb", 0.20, 0.15, 0.30}, {"chemlist", 0.18, 0.12, 0.30},
    {"diseasedb", 0.22, 0.10, 0.35}, {"seedvocab", 0.15, 0.15, 0.30},
    {"wordsense", 0.12, 0.08, 0.35}, {"toxdb", 0.16, 0.12, 0.30},
    {"ontolite", 0.10, 0.10, 0.35},  {"freetext", 0.14, 0.06, 0.30},
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
  if (!out) throw Error("write failed: " + p.string());
}

}  // namespace

void write_synthetic_preset(const std::string& dir, const PresetOptions& opts) {
  if (opts.n_terminologies < 1 || opts.n_terminologies > std::size(kOntologies))
    throw Error("preset: n_terminologies must lie in 1.." + std::to_string(std::size(kOntologies)));
  SyntheticConfig sc = opts.corpus;
  sc.seed = opts.seed;
  const SyntheticTask task = generate_corpus(sc);
  const TaskSplits splits = split_corpus(task.corpus, 0.6, 0.2);

  const fs::path root(dir);
  const fs::path data = root / "data";
  fs::create_directories(data / "terminologies");
  write_corpus(splits.train, (data / "train.jsonl").string());
  write_corpus(splits.validation, (data / "validation.jsonl").string());
  write_corpus(splits.test, (data / "test.jsonl").string());

  Rng rng(opts.seed ^ 0x5eed5eedULL);
  std::vector<std::string> in_dict;
  std::vector<int> in_dict_class;
  for (const auto& f : task.lexicon)
    if (!f.out_of_dictionary) {
      in_dict.push_back(f.text);
      in_dict_class.push_back(f.cls);
    }
  auto entity_type = [&](int cls) { return "T_" + task.schema.name(cls); };

  json terms = json::array();
  for (size_t t = 0; t < opts.n_terminologies; ++t) {
    const OntologySpec& spec = kOntologies[t];
    std::string tsv;
    for (size_t i = 0; i < in_dict.size(); ++i) {
      if (!rng.bernoulli(spec.entity_coverage)) continue;
      const bool wrong = rng.bernoulli(spec.noise);
      tsv += in_dict[i] + "\t" + (wrong ? std::string("T_BACKGROUND") : entity_type(in_dict_class[i])) + "\n";
    }
    for (const auto& w : task.vocabulary) {
      if (!rng.bernoulli(spec.background_coverage)) continue;
      std::string type = "T_BACKGROUND";
      if (rng.bernoulli(spec.noise))
        type = entity_type(1 + static_cast<int>(rng.below(static_cast<uint64_t>(task.schema.k - 1))));
      tsv += w + "\t" + type + "\n";
    }
    const std::string file = std::string(spec.name) + ".tsv";
    write_text(data / "terminologies" / file, tsv);
    terms.push_back({{"name", spec.name}, {"path", "data/terminologies/" + file}});
  }

  json class_map = {{"T_BACKGROUND", task.schema.name(0)}};
  for (int c = 1; c < task.schema.k; ++c) class_map[entity_type(c)] = task.schema.name(c);
  write_text(data / "class_map.json", class_map.dump(2) + "\n");

  // every entity form with its class; held-out forms are absent from all terminologies
  std::string lex = "form\tclass\theld_out\n";
  for (const auto& f : task.lexicon)
    lex += f.text + "\t" + task.schema.name(f.cls) + "\t" + (f.out_of_dictionary ? "1" : "0") + "\n";
  write_text(data / "lexicon.tsv", lex);

  // Synonym groups of two or three same-class dictionary forms.
  std::string syn;
  std::vector<size_t> order(in_dict.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  size_t group = 0;
  for (size_t i = 0; i + 2 < order.size() && group < 40; i += 3) {
    std::vector<size_t> members;
    for (size_t u = i; u < i + 3; ++u)
      if (in_dict_class[order[u]] == in_dict_class[order[i]]) members.push_back(order[u]);
    if (members.size() < 2) continue;
    for (size_t m : members) syn += "S" + std::to_string(group) + "\t" + in_dict[m] + "\n";
    ++group;
  }
  write_text(data / "synsets.tsv", syn);

  // Guideline examples: a handful of entity and background words.
  json positive = json::array(), negative = json::array();
  for (size_t i = 0; i < 12 && i < in_dict.size(); ++i) positive.push_back(in_dict[order[i]]);
  for (size_t i = 0; i < 12; ++i) negative.push_back(task.vocabulary[i * 7 % task.vocabulary.size()]);

  const std::string entity = task.schema.name(1);
  json lfs = json::array();
  lfs.push_back({{"name", "guidelines"},
                 {"kind", "guideline_dict"},
                 {"tier", 1},
                 {"positive", positive},
                 {"negative", negative},
                 {"entity_class", entity}});
  lfs.push_back({{"kind", "semantic_type"}, {"tier", 2}, {"terminologies", "partition"}});
  lfs.push_back({{"name", "synsets"}, {"kind", "synset"}, {"tier", 3}, {"mode", "any_pair"}});
  lfs.push_back({{"name", "suffix_osis"},
                 {"kind", "pattern"},
                 {"tier", 4},
                 {"patterns", {"\\b[a-z]+osis\\b"}},
                 {"ignore_case", true},
                 {"label", entity}});

  json classes = json::array();
  for (const auto& n : task.schema.class_names) classes.push_back(n);
  for (int tier = 1; tier <= 4; ++tier) {
    json cfg;
    cfg["schema"] = {{"classes", classes}, {"default", task.schema.name(0)}};
    cfg["task"] = "ner";
    cfg["corpus"] = {{"train", "data/train.jsonl"},
                     {"validation", "data/validation.jsonl"},
                     {"test", "data/test.jsonl"}};
    cfg["terminologies"] = terms;
    cfg["class_map"] = "data/class_map.json";
    cfg["synsets"] = {"data/synsets.tsv"};
    cfg["partition"] = opts.n_terminologies;
    cfg["tier"] = tier;
    cfg["labeling_functions"] = lfs;
    cfg["label_model"] = {{"learning_rate", 0.01}, {"epochs", 100}, {"l2", 1e-4}, {"accuracy_prior", 0.7}};
    cfg["end_model"] = {{"enabled", true}, {"learning_rate", 0.1}, {"epochs", 10}, {"batch_size", 32},
                        {"l2", 0.0}, {"supervised_baseline", true}};
    cfg["seeds"] = {1, 2, 3};
    write_text(root / ("tier" + std::to_string(tier) + ".json"), cfg.dump(2) + "\n");
  }
}

}  // namespace wsner
