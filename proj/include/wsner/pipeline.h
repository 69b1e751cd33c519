#ifndef WSNER_PIPELINE_H_
#define WSNER_PIPELINE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsner/corpus.h"
#include "wsner/endmodel.h"
#include "wsner/labelers.h"
#include "wsner/labelmodel.h"
#include "wsner/metrics.h"
#include "wsner/ontology.h"

namespace wsner {

inline constexpr const char* kVersion = "0.1.0";

// One entry of the labeling-function bundle.
struct LfSpec {
  std::string name;
  LfKind kind = LfKind::kSemanticType;
  int tier = 1;
  // semantic_type: "partition" expands to the ranked head plus merged tail;
  // any other value names a single terminology.
  std::string terminologies = "partition";
  std::vector<std::string> slot_patterns;
  bool default_slot_patterns = true;
  SynsetMode synset_mode = SynsetMode::kAnyPair;
  std::vector<std::string> patterns;
  bool ignore_case = false;
  int label = 1;
  std::vector<std::string> positive, negative;
  bool vote_stopwords = true, vote_numbers = true, vote_punctuation = true;
  CueRule cue;
  DatetimeRule datetime;
};

struct TerminologyRef {
  std::string name;
  std::string path;
};

struct PipelineConfig {
  std::string source;  // file the config came from, if any
  TaskSchema schema;
  bool span_task = false;
  std::string train_path, validation_path, test_path;
  std::optional<std::string> stopwords_path;
  std::vector<TerminologyRef> terminologies;
  std::optional<std::string> class_map_path;
  std::string class_map_inline;  // JSON object text when given in the config
  std::vector<std::string> synset_paths;
  size_t partition = 1;
  int tier = 4;
  std::vector<LfSpec> lfs;
  LabelModelConfig label_model;
  EndModelConfig end_model;
  bool end_model_enabled = true;
  bool supervised_baseline = false;
  bool early_stopping = true;
  std::vector<uint64_t> seeds = {0};
  std::string canonical;  // normalized JSON text, hashed into the manifest
};

// Relative paths resolve against the config file's directory. Every referenced
// file must exist; errors name the missing path.
PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig parse_pipeline_config(const std::string& json_text, const std::string& base_dir);

struct Resources {
  StopwordSet stopwords;
  std::vector<Terminology> terminologies;  // preprocessed, config order
  ClassMap class_map;
  std::shared_ptr<const SynsetIndex> synsets;
  std::shared_ptr<const TermClassMap> pooled;  // every terminology together
};

Resources load_resources(const PipelineConfig& cfg);

struct Splits {
  Corpus train, validation, test;
  bool has_validation = false, has_test = false;
};

Splits load_splits(const PipelineConfig& cfg);

struct LfSet {
  std::vector<LfPtr> lfs;
  std::optional<PartitionPlan> plan;
};

// Labeling functions of every bundle entry with tier <= cfg.tier. Partitioned
// semantic-type entries are ranked on `rank_corpus`.
LfSet build_labeling_functions(const PipelineConfig& cfg, const Resources& res,
                               const Corpus& rank_corpus, size_t s);

// Label matrix of a split; span tasks vote on gold entities.
LabelMatrix label_split(const PipelineConfig& cfg, const LfSet& lfs, const Corpus& corpus);

// Gold IO class per corpus row.
std::vector<int> gold_tags(const Corpus& corpus, const TaskSchema& schema, Warnings* warnings = nullptr);

// NER: exact span match over IO tags. Span tasks: token_micro over the head
// token of each gold entity.
EvalReport evaluate_tags(const PipelineConfig& cfg, const Corpus& corpus, std::span<const int> pred,
                         std::span<const int> gold);

struct SweepRow {
  size_t s = 0;
  double mv_f1 = 0.0;
  double lm_f1 = 0.0;
};

// Per s: rebuild the ontology functions, refit on train and score MV and the
// label model on the validation split (or train when there is none).
std::vector<SweepRow> sweep_partitions(const PipelineConfig& cfg, const Resources& res,
                                       const Splits& splits, std::span<const size_t> s_values,
                                       uint64_t seed);
std::string format_sweep(std::span<const SweepRow> rows);

struct SearchQuery {
  std::string pattern;
  bool phrase = false;  // match the pattern literally
  size_t window = 5;
  std::vector<std::string> highlight;  // labeling-function names; empty = all given
};

// One block per match in (document, offset) order: the match in context, then
// one line of votes per highlighted function ("·" = abstain).
std::string search_corpus(const Corpus& corpus, const SearchQuery& q, const TaskSchema& schema,
                          std::span<const LfPtr> lfs = {}, const EntityIndex* entities = nullptr);

// Stage-level driver over a run directory. Each stage reads what earlier
// stages wrote, so the CLI can run them one at a time.
class Run {
 public:
  Run(PipelineConfig cfg, std::string out_dir);

  void ingest();
  void apply_lfs();
  void fit(uint64_t seed);
  void predict(uint64_t seed);
  void train(uint64_t seed);
  void eval(uint64_t seed);
  void report();
  void sweep(std::span<const size_t> s_values);
  // Every stage for every configured seed, then the report.
  void all();

  // Rewrites manifest.json listing every file with its SHA-256.
  void write_manifest() const;
  // Runs `fn` as stage `name`: on failure leaves a FAILED marker and rethrows
  // as StageError.
  template <typename Fn>
  void stage(const std::string& name, Fn&& fn);

  const PipelineConfig& config() const { return cfg_; }
  const std::string& out_dir() const { return out_; }

 private:
  std::string path(const std::string& rel) const;
  std::string seed_dir(uint64_t seed) const;
  Corpus load_split(const std::string& split) const;
  const Resources& resources();

  PipelineConfig cfg_;
  std::string out_;
  std::optional<Resources> res_;
};

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

void mark_failed(const std::string& out_dir, const std::string& stage, const std::string& message);

template <typename Fn>
void Run::stage(const std::string& name, Fn&& fn) {
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    mark_failed(out_, name, e.what());
    throw StageError(name, e.what());
  }
}

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

}  // namespace wsner

#endif  // WSNER_PIPELINE_H_
