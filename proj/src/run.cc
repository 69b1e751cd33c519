// Run directory stages.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "wsner/pipeline.h"

namespace wsner {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const char* const kSplits[] = {"train", "validation", "test"};

void write_text(const std::string& path, const std::string& s) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << s;
  if (!out) throw Error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json counts_json(const Counts& c) {
  return {{"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()},
          {"tp", c.tp},                 {"fp", c.fp},           {"fn", c.fn}};
}

json report_json(const EvalReport& r, const TaskSchema& schema) {
  json j = counts_json(r.micro);
  j["mode"] = r.mode;
  json per = json::object();
  for (const auto& [cls, c] : r.per_class) per[schema.name(cls)] = counts_json(c);
  j["per_class"] = per;
  return j;
}

}  // namespace

void mark_failed(const std::string& out_dir, const std::string& stage, const std::string& message) {
  try {
    write_text((fs::path(out_dir) / "FAILED").string(), "stage: " + stage + "\nerror: " + message + "\n");
  } catch (...) {
    // The original error is more useful than this one.
  }
}

Run::Run(PipelineConfig cfg, std::string out_dir) : cfg_(std::move(cfg)), out_(std::move(out_dir)) {
  fs::create_directories(out_);
  fs::remove(fs::path(out_) / "FAILED");
}

std::string Run::path(const std::string& rel) const { return (fs::path(out_) / rel).string(); }

std::string Run::seed_dir(uint64_t seed) const { return "seed-" + std::to_string(seed); }

const Resources& Run::resources() {
  if (!res_) res_ = load_resources(cfg_);
  return *res_;
}

Corpus Run::load_split(const std::string& split) const {
  const std::string p = path("corpus/" + split + ".jsonl");
  if (!fs::exists(p)) throw Error("missing " + p + " (run ingest first)");
  return ingest_corpus(p, cfg_.schema);
}

void Run::ingest() {
  stage("ingest", [&] {
    const Splits s = load_splits(cfg_);
    fs::create_directories(path("corpus"));
    std::string stats = "split\tdocuments\tsentences\ttokens\tspans\n";
    auto emit = [&](const char* name, const Corpus& c) {
      write_corpus(c, path(std::string("corpus/") + name + ".jsonl"));
      stats += std::string(name) + "\t" + std::to_string(c.documents.size()) + "\t" +
               std::to_string(c.sentence_count()) + "\t" + std::to_string(c.token_count()) + "\t" +
               std::to_string(c.gold.size()) + "\n";
    };
    emit("train", s.train);
    if (s.has_validation) emit("validation", s.validation);
    if (s.has_test) emit("test", s.test);
    write_text(path("ingest.tsv"), stats);
  });
}

void Run::apply_lfs() {
  stage("lf-apply", [&] {
    const Corpus train = load_split("train");
    const LfSet lfs = build_labeling_functions(cfg_, resources(), train, cfg_.partition);
    if (lfs.plan) {
      std::string t = "rank\tterminology\tcoverage\trole\n";
      for (size_t i = 0; i < lfs.plan->ranked.size(); ++i)
        t += std::to_string(i + 1) + "\t" + lfs.plan->ranked[i].name + "\t" +
             std::to_string(lfs.plan->ranked[i].coverage) + "\t" + (i < lfs.plan->s ? "head" : "tail") + "\n";
      write_text(path("partition.tsv"), t);
    }
    std::string summary = "split\tfunction\tkind\tvotes\tcoverage\n";
    for (const char* split : kSplits) {
      if (!fs::exists(path(std::string("corpus/") + split + ".jsonl"))) continue;
      const Corpus c = std::string(split) == "train" ? train : load_split(split);
      const LabelMatrix L = label_split(cfg_, lfs, c);
      fs::create_directories(path("matrices"));
      write_label_matrix(L, path(std::string("matrices/") + split + ".trlm"));
      for (size_t j = 0; j < L.m; ++j) {
        size_t votes = 0;
        for (size_t i = 0; i < L.n; ++i) votes += L.at(i, j) != kAbstain;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", L.n ? static_cast<double>(votes) / static_cast<double>(L.n) : 0.0);
        summary += std::string(split) + "\t" + L.source_names[j] + "\t" +
                   std::string(to_string(lfs.lfs[j]->kind())) + "\t" + std::to_string(votes) + "\t" + buf + "\n";
      }
    }
    write_text(path("lfs.tsv"), summary);
  });
}

void Run::fit(uint64_t seed) {
  stage("fit", [&] {
    const LabelMatrix L = read_label_matrix(path("matrices/train.trlm"));
    const std::string dir = seed_dir(seed);
    fs::create_directories(path(dir));
    if (L.m < 3) {
      // Too few sources for the label model: majority vote stands in.
      write_text(path(dir + "/lm_fallback.txt"),
                 "label model needs at least 3 sources; " + std::to_string(L.m) +
                     " available, using majority vote\n");
      fs::remove(path(dir + "/params.json"));
      return;
    }
    fs::remove(path(dir + "/lm_fallback.txt"));
    LabelModelConfig lm = cfg_.label_model;
    lm.seed = seed;
    Warnings w;
    const auto params = fit_label_model(L, lm, cfg_.schema, &w);
    write_params(params, path(dir + "/params.json"));
    std::string log;
    for (const auto& s : w) log += s + "\n";
    write_text(path(dir + "/fit_warnings.txt"), log);
  });
}

void Run::predict(uint64_t seed) {
  stage("predict", [&] {
    const std::string dir = seed_dir(seed);
    const bool fallback = fs::exists(path(dir + "/lm_fallback.txt"));
    std::optional<LabelModelParams> params;
    if (!fallback) params = read_params(path(dir + "/params.json"));
    for (const char* split : kSplits) {
      const std::string mpath = path(std::string("matrices/") + split + ".trlm");
      if (!fs::exists(mpath)) continue;
      const LabelMatrix L = read_label_matrix(mpath);
      ProbabilisticDataset d;
      if (params) {
        d = predict_proba(L, *params, cfg_.schema);
      } else {
        const auto mv = majority_vote(L, cfg_.schema);
        d.k = cfg_.schema.k;
        d.doc_ids = L.doc_ids;
        d.rows = L.rows;
        d.posteriors.assign(L.n * static_cast<size_t>(d.k), 0.0);
        d.mask.assign(L.n, 0);
        for (size_t i = 0; i < L.n; ++i) {
          const auto row = L.row(i);
          d.mask[i] = std::all_of(row.begin(), row.end(), [](int8_t v) { return v == kAbstain; });
          d.posteriors[i * static_cast<size_t>(d.k) + static_cast<size_t>(mv[i])] = 1.0;
        }
      }
      fs::create_directories(path(dir));
      write_dataset(d, path(dir + "/probs_" + split + ".jsonl"));
    }
  });
}

void Run::train(uint64_t seed) {
  stage("train", [&] {
    if (!cfg_.end_model_enabled) return;
    const std::string dir = seed_dir(seed);
    const Corpus train = load_split("train");
    const ProbabilisticDataset d = read_dataset(path(dir + "/probs_train.jsonl"));
    EndModelConfig em = cfg_.end_model;
    em.seed = seed;
    const auto feats = featurize(train, em.dim);

    ValidationFn validate;
    std::optional<Corpus> val;
    std::vector<FeatureVector> vfeats;
    std::vector<int> vgold;
    if (cfg_.early_stopping && fs::exists(path("corpus/validation.jsonl"))) {
      val = load_split("validation");
      vfeats = featurize(*val, em.dim);
      vgold = gold_tags(*val, cfg_.schema);
      validate = [&](const LinearTokenModel& m) {
        return evaluate_tags(cfg_, *val, predict_tags(m, vfeats), vgold).f1();
      };
    }
    auto log = [&](const TrainResult& r, const std::string& name) {
      std::string t = "epoch\tloss\n";
      char buf[64];
      for (size_t e = 0; e < r.epoch_loss.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu\t%.10f\n", e + 1, r.epoch_loss[e]);
        t += buf;
      }
      t += "best_epoch\t" + std::to_string(r.best_epoch) + "\n";
      for (const auto& w : r.warnings) t += "warning\t" + w + "\n";
      write_text(path(dir + "/" + name + ".tsv"), t);
    };
    fs::create_directories(path(dir));
    const TrainResult ws = train_noise_aware(feats, d, em, validate);
    write_model(ws.model, path(dir + "/model.bin"));
    log(ws, "train_log");
    if (cfg_.supervised_baseline) {
      const auto gold = gold_tags(train, cfg_.schema);
      const TrainResult fs_ = train_noise_aware(feats, one_hot_dataset(gold, train, cfg_.schema.k), em, validate);
      write_model(fs_.model, path(dir + "/model_supervised.bin"));
      log(fs_, "train_log_supervised");
    }
  });
}

void Run::eval(uint64_t seed) {
  stage("eval", [&] {
    if (!fs::exists(path("corpus/test.jsonl"))) throw Error("the config has no test split");
    const std::string dir = seed_dir(seed);
    const Corpus test = load_split("test");
    const auto gold = gold_tags(test, cfg_.schema);
    const LabelMatrix L = read_label_matrix(path("matrices/test.trlm"));
    std::map<std::string, EvalReport> reports;
    reports["MV"] = evaluate_tags(cfg_, test, majority_vote(L, cfg_.schema), gold);
    const auto probs = read_dataset(path(dir + "/probs_test.jsonl"));
    reports["LM"] = evaluate_tags(cfg_, test, lm_hard_labels(probs, cfg_.schema), gold);
    if (cfg_.end_model_enabled) {
      const auto feats = featurize(test, cfg_.end_model.dim);
      reports["WS"] = evaluate_tags(cfg_, test, predict_tags(read_model(path(dir + "/model.bin")), feats), gold);
      if (cfg_.supervised_baseline)
        reports["FS"] = evaluate_tags(cfg_, test,
                                      predict_tags(read_model(path(dir + "/model_supervised.bin")), feats), gold);
    }
    json j;
    j["seed"] = seed;
    j["split"] = "test";
    j["lm_fallback"] = fs::exists(path(dir + "/lm_fallback.txt"));
    std::string kv;
    for (const auto& [name, r] : reports) {
      j["systems"][name] = report_json(r, cfg_.schema);
      kv += report_kv(r, cfg_.schema, name + ".");
    }
    write_text(path(dir + "/report.json"), j.dump(2) + "\n");
    write_text(path(dir + "/report.txt"), kv);
  });
}

void Run::report() {
  stage("report", [&] {
    std::map<std::string, std::map<std::string, std::vector<double>>> values;
    std::vector<uint64_t> seeds;
    for (uint64_t seed : cfg_.seeds) {
      const std::string p = path(seed_dir(seed) + "/report.json");
      if (!fs::exists(p)) throw Error("missing " + p + " (run eval first)");
      const json j = json::parse(read_text(p));
      seeds.push_back(seed);
      for (const auto& [name, r] : j.at("systems").items())
        for (const char* key : {"precision", "recall", "f1"}) values[name][key].push_back(r.at(key).get<double>());
    }
    json out;
    out["seeds"] = seeds;
    std::string txt = "system\tprecision\trecall\tf1\n";
    for (const auto& [name, metrics] : values) {
      txt += name;
      for (const char* key : {"precision", "recall", "f1"}) {
        const MeanSd ms = mean_sd(metrics.at(key));
        out["systems"][name][key] = {{"mean", ms.mean}, {"sd", ms.sd}};
        txt += "\t" + format_mean_sd(ms);
      }
      txt += "\n";
    }
    write_text(path("summary.json"), out.dump(2) + "\n");
    write_text(path("summary.txt"), txt);
  });
}

void Run::sweep(std::span<const size_t> s_values) {
  stage("sweep", [&] {
    Splits s;
    s.train = load_split("train");
    if (fs::exists(path("corpus/validation.jsonl"))) {
      s.validation = load_split("validation");
      s.has_validation = true;
    }
    const auto rows = sweep_partitions(cfg_, resources(), s, s_values, cfg_.seeds.front());
    write_text(path("sweep.tsv"), format_sweep(rows));
  });
}

void Run::all() {
  ingest();
  apply_lfs();
  for (uint64_t seed : cfg_.seeds) {
    fit(seed);
    predict(seed);
    train(seed);
    eval(seed);
  }
  report();
}

void Run::write_manifest() const {
  json files = json::array();
  std::vector<std::string> rel;
  for (const auto& e : fs::recursive_directory_iterator(out_))
    if (e.is_regular_file()) {
      const std::string r = fs::relative(e.path(), out_).generic_string();
      if (r != "manifest.json") rel.push_back(r);
    }
  std::sort(rel.begin(), rel.end());
  for (const auto& r : rel) {
    const std::string p = path(r);
    files.push_back({{"path", r}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
  }
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  json m;
  m["tool"] = "wsner";
  m["version"] = kVersion;
  m["created"] = stamp;
  m["config_sha256"] = sha256_hex(cfg_.canonical);
  m["seeds"] = cfg_.seeds;
  m["files"] = files;
  write_text(path("manifest.json"), m.dump(2) + "\n");
}

}  // namespace wsner
