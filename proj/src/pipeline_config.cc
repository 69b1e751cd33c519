// Pipeline configuration: JSON parsing and path resolution.

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wsner/pipeline.h"
#include "wsner/text.h"

namespace wsner {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw Error(where + ": unknown key '" + key + "'");
}

std::string resolve(const std::string& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = fs::path(base) / path;
  return path.lexically_normal().string();
}

std::string existing(const std::string& base, const json& value, const std::string& what) {
  if (!value.is_string()) throw Error(what + " must be a path string");
  const std::string p = resolve(base, value.get<std::string>());
  if (!fs::exists(p)) throw Error(what + ": no such file '" + p + "'");
  return p;
}

const json& required(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw Error(where + ": missing '" + key + "'");
  return j[key];
}

int parse_label(const json& v, const TaskSchema& schema, const std::string& where) {
  if (v.is_number_integer()) {
    const int c = v.get<int>();
    if (!schema.valid_class(c)) throw Error(where + ": class " + std::to_string(c) + " outside 0.." +
                                            std::to_string(schema.k - 1));
    return c;
  }
  if (v.is_string()) return schema.class_index(v.get<std::string>());
  throw Error(where + ": class must be a name or an integer");
}

std::vector<std::string> string_list(const json& v, const std::string& where) {
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw Error(where + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw Error(where + " must be a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (!t.empty() && t[0] != '#') out.emplace_back(t);
  }
  return out;
}

LfSpec parse_lf(const json& j, size_t index, const TaskSchema& schema, const std::string& base) {
  const std::string where = "labeling_functions[" + std::to_string(index) + "]";
  if (!j.is_object()) throw Error(where + " must be an object");
  if (!j.contains("kind")) throw Error(where + ": missing 'kind'");
  LfSpec s;
  s.kind = parse_lf_kind(required(j, "kind", where).get<std::string>());
  s.name = j.value("name", std::string());
  s.tier = j.value("tier", 1);
  if (s.tier < 1 || s.tier > 4) throw Error(where + ": tier must lie in 1..4");
  auto need_name = [&] {
    if (s.name.empty()) throw Error(where + ": missing 'name'");
  };
  switch (s.kind) {
    case LfKind::kSemanticType:
      check_keys(j, where, {"kind", "name", "tier", "terminologies", "slot_patterns"});
      s.terminologies = j.value("terminologies", std::string("partition"));
      if (j.contains("slot_patterns")) {
        s.slot_patterns = string_list(j["slot_patterns"], where + ".slot_patterns");
        s.default_slot_patterns = false;
        for (const auto& p : s.slot_patterns) parse_slot_pattern(p);
      }
      break;
    case LfKind::kSynset: {
      check_keys(j, where, {"kind", "name", "tier", "mode"});
      if (s.name.empty()) s.name = "synset";
      const std::string mode = j.value("mode", std::string("any_pair"));
      if (mode == "any_pair")
        s.synset_mode = SynsetMode::kAnyPair;
      else if (mode == "schwartz_hearst")
        s.synset_mode = SynsetMode::kSchwartzHearst;
      else
        throw Error(where + ": mode must be 'any_pair' or 'schwartz_hearst'");
      break;
    }
    case LfKind::kPattern:
      check_keys(j, where, {"kind", "name", "tier", "patterns", "ignore_case", "label"});
      need_name();
      if (!j.contains("patterns")) throw Error(where + ": missing 'patterns'");
      s.patterns = string_list(j["patterns"], where + ".patterns");
      s.ignore_case = j.value("ignore_case", false);
      s.label = parse_label(required(j, "label", where), schema, where + ".label");
      PatternSet(s.patterns, s.ignore_case);
      break;
    case LfKind::kGuidelineDict:
      check_keys(j, where, {"kind", "name", "tier", "positive", "negative", "positive_file",
                            "negative_file", "entity_class", "vote_stopwords", "vote_numbers",
                            "vote_punctuation"});
      need_name();
      if (j.contains("positive")) s.positive = string_list(j["positive"], where + ".positive");
      if (j.contains("negative")) s.negative = string_list(j["negative"], where + ".negative");
      if (j.contains("positive_file"))
        for (auto& t : read_lines(existing(base, j["positive_file"], where + ".positive_file")))
          s.positive.push_back(std::move(t));
      if (j.contains("negative_file"))
        for (auto& t : read_lines(existing(base, j["negative_file"], where + ".negative_file")))
          s.negative.push_back(std::move(t));
      s.label = parse_label(j.value("entity_class", json(1)), schema, where + ".entity_class");
      s.vote_stopwords = j.value("vote_stopwords", true);
      s.vote_numbers = j.value("vote_numbers", true);
      s.vote_punctuation = j.value("vote_punctuation", true);
      break;
    case LfKind::kCueWindow: {
      check_keys(j, where, {"kind", "name", "tier", "patterns", "direction", "window", "label",
                            "terminators"});
      need_name();
      s.cue.patterns = string_list(required(j, "patterns", where), where + ".patterns");
      const std::string dir = j.value("direction", std::string("left"));
      if (dir == "left")
        s.cue.direction = CueDirection::kLeft;
      else if (dir == "right")
        s.cue.direction = CueDirection::kRight;
      else if (dir == "both")
        s.cue.direction = CueDirection::kBoth;
      else
        throw Error(where + ": direction must be left, right or both");
      const int window = j.value("window", 6);
      if (window < 1) throw Error(where + ": window must be >= 1");
      s.cue.window = static_cast<size_t>(window);
      s.cue.label = parse_label(required(j, "label", where), schema, where + ".label");
      if (j.contains("terminators")) s.cue.terminators = string_list(j["terminators"], where + ".terminators");
      CueMatcher check(s.cue);
      break;
    }
    case LfKind::kNearestDatetime: {
      check_keys(j, where, {"kind", "name", "tier", "before", "overlap", "after", "past_sections",
                            "timex_patterns"});
      need_name();
      s.datetime = DatetimeRule::defaults(parse_label(required(j, "before", where), schema, where + ".before"),
                                          parse_label(required(j, "overlap", where), schema, where + ".overlap"),
                                          parse_label(required(j, "after", where), schema, where + ".after"));
      if (j.contains("past_sections")) {
        s.datetime.past_sections.clear();
        for (const auto& p : string_list(j["past_sections"], where + ".past_sections"))
          s.datetime.past_sections.insert(text::lower(p));
      }
      if (j.contains("timex_patterns"))
        s.datetime.timex_patterns = string_list(j["timex_patterns"], where + ".timex_patterns");
      DatetimeMatcher check(s.datetime);
      break;
    }
  }
  return s;
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error("config: top level must be an object");
  PipelineConfig cfg;
  try {
    check_keys(j, "config", {"schema", "task", "corpus", "stopwords", "terminologies", "class_map",
                             "synsets", "partition", "tier", "labeling_functions", "label_model",
                             "end_model", "seeds"});
    const json& schema = required(j, "schema", "config");
    check_keys(schema, "schema", {"classes", "default"});
    cfg.schema.class_names = string_list(required(schema, "classes", "schema"), "schema.classes");
    cfg.schema.k = static_cast<int>(cfg.schema.class_names.size());
    cfg.schema.default_class = 0;
    if (schema.contains("default")) {
      const json& d = schema["default"];
      cfg.schema.default_class = d.is_string() ? -1 : d.get<int>();
      if (d.is_string())
        for (int c = 0; c < cfg.schema.k; ++c)
          if (cfg.schema.class_names[static_cast<size_t>(c)] == d.get<std::string>()) cfg.schema.default_class = c;
      if (!cfg.schema.valid_class(cfg.schema.default_class)) throw Error("schema.default is not one of the classes");
    }
    cfg.schema.validate();

    const std::string task = j.value("task", std::string("ner"));
    if (task != "ner" && task != "span") throw Error("task must be 'ner' or 'span'");
    cfg.span_task = task == "span";

    const json& corpus = required(j, "corpus", "config");
    check_keys(corpus, "corpus", {"train", "validation", "test"});
    cfg.train_path = existing(base_dir, required(corpus, "train", "corpus"), "corpus.train");
    if (corpus.contains("validation"))
      cfg.validation_path = existing(base_dir, corpus["validation"], "corpus.validation");
    if (corpus.contains("test")) cfg.test_path = existing(base_dir, corpus["test"], "corpus.test");

    if (j.contains("stopwords")) cfg.stopwords_path = existing(base_dir, j["stopwords"], "stopwords");

    if (j.contains("terminologies")) {
      std::set<std::string> names;
      for (const auto& t : j["terminologies"]) {
        TerminologyRef ref;
        if (t.is_string()) {
          ref.path = existing(base_dir, t, "terminologies");
        } else {
          check_keys(t, "terminologies[]", {"name", "path"});
          ref.path = existing(base_dir, required(t, "path", "terminologies[]"), "terminologies[].path");
          ref.name = t.value("name", std::string());
        }
        if (ref.name.empty()) ref.name = fs::path(ref.path).stem().string();
        if (!names.insert(ref.name).second) throw Error("duplicate terminology name '" + ref.name + "'");
        cfg.terminologies.push_back(std::move(ref));
      }
    }
    if (j.contains("class_map")) {
      if (j["class_map"].is_object())
        cfg.class_map_inline = j["class_map"].dump();
      else
        cfg.class_map_path = existing(base_dir, j["class_map"], "class_map");
    }
    if (j.contains("synsets"))
      for (const auto& p : string_list(j["synsets"], "synsets"))
        cfg.synset_paths.push_back(existing(base_dir, json(p), "synsets"));

    cfg.partition = j.value("partition", std::max<size_t>(1, cfg.terminologies.size()));
    cfg.tier = j.value("tier", 4);
    if (cfg.tier < 1 || cfg.tier > 4) throw Error("tier must lie in 1..4");

    if (j.contains("labeling_functions")) {
      size_t i = 0;
      for (const auto& lf : j["labeling_functions"]) cfg.lfs.push_back(parse_lf(lf, i++, cfg.schema, base_dir));
    }
    bool needs_terms = false;
    for (const auto& lf : cfg.lfs) {
      if (lf.tier > cfg.tier) continue;
      if (lf.kind == LfKind::kSemanticType || lf.kind == LfKind::kSynset) needs_terms = true;
      if (lf.kind == LfKind::kSynset && cfg.synset_paths.empty())
        throw Error("a synset labeling function needs 'synsets'");
      if (lf.kind == LfKind::kSemanticType && lf.terminologies != "partition") {
        bool found = false;
        for (const auto& t : cfg.terminologies) found |= t.name == lf.terminologies;
        if (!found) throw Error("labeling function refers to unknown terminology '" + lf.terminologies + "'");
      }
      if ((lf.kind == LfKind::kCueWindow || lf.kind == LfKind::kNearestDatetime) && !cfg.span_task)
        throw Error(std::string(to_string(lf.kind)) + " functions need task 'span'");
    }
    if (needs_terms) {
      if (cfg.terminologies.empty()) throw Error("dictionary labeling functions need 'terminologies'");
      if (!cfg.class_map_path && cfg.class_map_inline.empty())
        throw Error("dictionary labeling functions need 'class_map'");
    }
    if (cfg.partition < 1 || (!cfg.terminologies.empty() && cfg.partition > cfg.terminologies.size()))
      throw Error("partition must lie in 1.." + std::to_string(std::max<size_t>(1, cfg.terminologies.size())));

    if (j.contains("label_model")) {
      const json& lm = j["label_model"];
      check_keys(lm, "label_model", {"learning_rate", "epochs", "l2", "accuracy_prior"});
      cfg.label_model.learning_rate = lm.value("learning_rate", cfg.label_model.learning_rate);
      cfg.label_model.epochs = lm.value("epochs", cfg.label_model.epochs);
      cfg.label_model.l2 = lm.value("l2", cfg.label_model.l2);
      cfg.label_model.accuracy_prior = lm.value("accuracy_prior", cfg.label_model.accuracy_prior);
    }
    cfg.label_model.validate();
    if (j.contains("end_model")) {
      const json& em = j["end_model"];
      check_keys(em, "end_model", {"enabled", "learning_rate", "epochs", "batch_size", "l2", "dim",
                                   "warmup_fraction", "supervised_baseline", "early_stopping"});
      cfg.end_model_enabled = em.value("enabled", true);
      cfg.end_model.learning_rate = em.value("learning_rate", cfg.end_model.learning_rate);
      cfg.end_model.epochs = em.value("epochs", cfg.end_model.epochs);
      cfg.end_model.batch_size = em.value("batch_size", cfg.end_model.batch_size);
      cfg.end_model.l2 = em.value("l2", cfg.end_model.l2);
      cfg.end_model.dim = em.value("dim", cfg.end_model.dim);
      cfg.end_model.warmup_fraction = em.value("warmup_fraction", cfg.end_model.warmup_fraction);
      cfg.supervised_baseline = em.value("supervised_baseline", false);
      cfg.early_stopping = em.value("early_stopping", true);
    }
    cfg.end_model.validate();
    if (j.contains("seeds")) {
      cfg.seeds.clear();
      for (const auto& s : j["seeds"]) cfg.seeds.push_back(s.get<uint64_t>());
      if (cfg.seeds.empty()) throw Error("seeds must not be empty");
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  cfg.canonical = j.dump();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto base = fs::path(path).parent_path().string();
  if (base.empty()) base = ".";
  PipelineConfig cfg = parse_pipeline_config(ss.str(), base);
  cfg.source = path;
  return cfg;
}

}  // namespace wsner
