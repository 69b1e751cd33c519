#ifndef WSNER_SYNTHETIC_H_
#define WSNER_SYNTHETIC_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsner/corpus.h"
#include "wsner/label_matrix.h"

namespace wsner {

struct SyntheticConfig {
  size_t n_docs = 100;
  size_t sentences_per_doc = 5;
  size_t min_sentence_len = 8;  // words, before the final "."
  size_t max_sentence_len = 20;
  double entity_rate = 0.2;     // stationary share of entity words
  double mean_entity_len = 1.5;
  int k = 2;
  double ood_fraction = 0.2;
  size_t vocabulary_size = 400;
  size_t forms_per_class = 150;
  uint64_t seed = 0;

  void validate() const;
};

struct EntityForm {
  std::string text;
  int cls = 1;
  bool out_of_dictionary = false;
};

struct SyntheticTask {
  TaskSchema schema;
  Corpus corpus;                       // documents with gold spans
  std::vector<int> tags;               // gold IO class per corpus row
  std::vector<std::string> vocabulary; // background words
  std::vector<EntityForm> lexicon;
  uint64_t seed = 0;
};

// Tags follow a two-state Markov chain per sentence (background / entity) with
// geometric entity runs; each run takes a uniform class in 1..k-1 and draws
// its words from that class's lexicon. Background words come from the
// vocabulary. Sentences end in " ." and start with a capital letter.
SyntheticTask generate_corpus(const SyntheticConfig& cfg);

enum class ErrorMode { kUniformFlip, kSpanTruncate };

struct SourceSpec {
  double accuracy = 0.8;
  double coverage = 1.0;
  ErrorMode error_mode = ErrorMode::kUniformFlip;
  // With probability copy_probability, repeat the vote of source copy_of
  // (an earlier index) instead of sampling independently.
  int copy_of = -1;
  double copy_probability = 0.0;

  void validate(size_t index) const;
};

// Votes for gold tags: each source votes with probability coverage, correctly
// with probability accuracy. A wrong vote is a uniform other class
// (uniform_flip) or, on an entity token, the default class (span_truncate).
// Returns n x m row-major votes.
std::vector<int8_t> simulate_votes(std::span<const int> gold, int k, int default_class,
                                   std::span<const SourceSpec> specs, uint64_t seed);

LabelMatrix simulate_sources(const SyntheticTask& task, std::span<const SourceSpec> specs,
                             uint64_t seed);

// Splits a task's documents into consecutive train / validation / test parts.
struct TaskSplits {
  Corpus train, validation, test;
};
TaskSplits split_corpus(const Corpus& corpus, double train_fraction, double validation_fraction);

struct PresetOptions {
  SyntheticConfig corpus;
  size_t n_terminologies = 10;
  uint64_t seed = 7;
};

// Writes a complete synthetic project under `dir`: data/{train,validation,test}.jsonl,
// data/terminologies/*.tsv, data/class_map.json, data/synsets.tsv, data/lexicon.tsv, and one
// pipeline config per ablation tier (tier1.json .. tier4.json).
void write_synthetic_preset(const std::string& dir, const PresetOptions& opts);

}  // namespace wsner

#endif  // WSNER_SYNTHETIC_H_
