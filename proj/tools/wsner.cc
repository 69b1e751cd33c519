// wsner: command-line driver for the weak supervision pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wsner/pipeline.h"
#include "wsner/synthetic.h"

namespace fs = std::filesystem;
using namespace wsner;

namespace {

std::vector<uint64_t> parse_seeds(const std::string& s) {
  std::vector<uint64_t> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    size_t used = 0;
    uint64_t v = 0;
    try {
      v = std::stoull(part, &used);
    } catch (...) {
      used = 0;
    }
    if (used != part.size()) throw Error("--seed: '" + part + "' is not a non-negative integer");
    out.push_back(v);
  }
  if (out.empty()) throw Error("--seed: no seeds given");
  return out;
}

struct Globals {
  std::string config;
  std::string seeds;
  std::string out = "run";
};

PipelineConfig load(const Globals& g, const std::string& command) {
  if (g.config.empty()) throw StageError(command, "--config is required");
  PipelineConfig cfg;
  try {
    cfg = load_pipeline_config(g.config);
    if (!g.seeds.empty()) cfg.seeds = parse_seeds(g.seeds);
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  return cfg;
}

// Runs one stage command over a run directory and refreshes the manifest.
template <typename Fn>
int run_stage(const Globals& g, const std::string& command, Fn&& fn) {
  std::optional<Run> run;
  try {
    run.emplace(load(g, command), g.out);
    fn(*run);
    run->write_manifest();
    return 0;
  } catch (const StageError& e) {
    std::cerr << "wsner: error in stage " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "wsner: error in stage " << command << ": " << e.what() << '\n';
    if (run) mark_failed(g.out, command, e.what());
  }
  if (run) {
    try {
      run->write_manifest();
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak supervision for sequence tagging: dictionaries and rules in, token labels out."};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "pipeline config (JSON)");
  app.add_option("--seed", g.seeds, "seed or comma-separated seeds (overrides the config)");
  app.add_option("--out", g.out, "run directory")->capture_default_str();
  app.set_version_flag("--version", kVersion);

  int status = 0;
  auto simple = [&](const char* name, const char* help, auto fn) {
    app.add_subcommand(name, help)->callback([&g, &status, name, fn] { status = run_stage(g, name, fn); });
  };
  auto per_seed = [](void (Run::*m)(uint64_t)) {
    return [m](Run& r) {
      for (uint64_t s : r.config().seeds) (r.*m)(s);
    };
  };

  simple("ingest", "tokenize and validate the corpora", [](Run& r) { r.ingest(); });
  simple("lf-apply", "build labeling functions and label matrices", [](Run& r) { r.apply_lfs(); });
  simple("fit", "fit the label model for each seed", per_seed(&Run::fit));
  simple("predict", "write posterior datasets for each seed", per_seed(&Run::predict));
  simple("train", "train the noise-aware end model for each seed", per_seed(&Run::train));
  simple("eval", "evaluate MV, LM and end models on the test split", per_seed(&Run::eval));
  simple("report", "aggregate per-seed reports into mean ± SD", [](Run& r) { r.report(); });
  simple("run", "every stage for every seed", [](Run& r) { r.all(); });

  std::vector<size_t> s_values;
  auto* sweep = app.add_subcommand("sweep", "label model vs majority vote across partition sizes");
  sweep->add_option("-s", s_values, "partition sizes, e.g. 1,2,5")->delimiter(',')->required();
  sweep->callback([&] {
    status = run_stage(g, "sweep", [&](Run& r) {
      if (!fs::exists(fs::path(r.out_dir()) / "corpus" / "train.jsonl")) r.ingest();
      r.sweep(s_values);
      std::cout << std::ifstream(fs::path(r.out_dir()) / "sweep.tsv").rdbuf();
    });
  });

  SearchQuery query;
  std::string split = "train";
  bool no_lfs = false;
  auto* search = app.add_subcommand("search", "find pattern matches with context and labeling-function votes");
  search->add_option("pattern", query.pattern, "regular expression (case-insensitive)")->required();
  search->add_flag("--phrase", query.phrase, "match the pattern literally");
  search->add_option("--window", query.window, "context tokens on each side")->capture_default_str();
  search->add_option("--highlight", query.highlight, "labeling functions to show")->delimiter(',');
  search->add_option("--split", split, "train, validation or test")->capture_default_str();
  search->add_flag("--no-lfs", no_lfs, "show matches only");
  search->callback([&] {
    try {
      const PipelineConfig cfg = load(g, "search");
      const std::string& p = split == "train" ? cfg.train_path : split == "validation" ? cfg.validation_path
                                                                                       : cfg.test_path;
      if (p.empty()) throw Error("the config has no " + split + " split");
      const Corpus corpus = ingest_corpus(p, cfg.schema);
      std::vector<LfPtr> lfs;
      std::optional<EntityIndex> entities;
      if (!no_lfs) {
        const Resources res = load_resources(cfg);
        lfs = build_labeling_functions(cfg, res, corpus, cfg.partition).lfs;
        if (cfg.span_task) entities = entities_from_gold(corpus);
      }
      std::cout << search_corpus(corpus, query, cfg.schema, lfs, entities ? &*entities : nullptr);
    } catch (const std::exception& e) {
      std::cerr << "wsner: error in stage search: " << e.what() << '\n';
      status = 1;
    }
  });

  PresetOptions preset;
  size_t docs = 250;
  uint64_t synth_seed = 7;
  auto* synth = app.add_subcommand("synth", "write a synthetic project (corpora, terminologies, tier configs)");
  synth->add_option("--docs", docs, "documents in total")->capture_default_str();
  synth->add_option("--data-seed", synth_seed, "generator seed")->capture_default_str();
  synth->callback([&] {
    try {
      preset.corpus.n_docs = docs;
      preset.seed = synth_seed;
      write_synthetic_preset(g.out, preset);
    } catch (const std::exception& e) {
      std::cerr << "wsner: error in stage synth: " << e.what() << '\n';
      status = 1;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return status;
}
