// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wsner/endmodel.h"
#include "wsner/kernels.h"
#include "wsner/labelmodel.h"
#include "wsner/metrics.h"
#include "wsner/pipeline.h"
#include "wsner/random.h"
#include "wsner/synthetic.h"

using namespace wsner;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kPreset = WSNER_SOURCE_DIR "/presets/synthetic";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("wsner-accept-" + tag + "-" + std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::vector<int> random_gold(size_t n, double rate, uint64_t seed) {
  Rng rng(seed);
  std::vector<int> g(n);
  for (auto& x : g) x = rng.bernoulli(rate) ? 1 : 0;
  return g;
}

LabelMatrix as_matrix(std::vector<int8_t> votes, size_t m) {
  LabelMatrix L;
  L.m = m;
  L.n = votes.size() / m;
  L.values = std::move(votes);
  for (size_t j = 0; j < m; ++j) L.source_names.push_back("s" + std::to_string(j));
  L.doc_ids = {"d"};
  for (size_t i = 0; i < L.n; ++i) L.rows.push_back({0, 0, i});
  return L;
}

double token_accuracy(const std::vector<int>& pred, const std::vector<int>& gold) {
  size_t ok = 0;
  for (size_t i = 0; i < gold.size(); ++i) ok += pred[i] == gold[i];
  return static_cast<double>(ok) / static_cast<double>(gold.size());
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).string();
    std::string body = read_file(e.path());
    if (rel == "manifest.json") {
      auto j = nlohmann::json::parse(body);
      j.erase("created");
      body = j.dump();
    }
    out[rel] = body;
  }
  return out;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// 1 -------------------------------------------------------------------------
Outcome accuracy_recovery() {
  const std::vector<double> p = {0.9, 0.85, 0.75, 0.65, 0.55};
  std::vector<SourceSpec> specs;
  for (double x : p) specs.push_back({x, 0.7});
  const auto gold = random_gold(50000, 0.5, 101);
  const auto t0 = Clock::now();
  const LabelMatrix L = as_matrix(simulate_votes(gold, 2, 0, specs, 102), p.size());
  LabelModelConfig cfg;
  cfg.seed = 1;
  const auto params = fit_label_model(L, cfg, TaskSchema::binary("O", "X"));
  const double secs = seconds_since(t0);
  double mae = 0;
  for (size_t j = 0; j < p.size(); ++j) mae += std::abs(params.accuracies[j][1] - (2 * p[j] - 1));
  mae /= static_cast<double>(p.size());
  char buf[128];
  std::snprintf(buf, sizeof buf, "MAE %.4f (< 0.02), %.3f s (< 5)", mae, secs);
  return {mae < 0.02 && secs < 5.0, buf};
}

// 2 -------------------------------------------------------------------------
Outcome lm_beats_mv() {
  std::vector<SourceSpec> specs(2, SourceSpec{0.9, 0.8});
  for (int i = 0; i < 8; ++i) specs.push_back({0.55, 0.8});
  const TaskSchema schema = TaskSchema::binary("O", "X");
  bool ok = true;
  std::string detail;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const auto gold = random_gold(20000, 0.5, 200 + seed);
    const LabelMatrix L = as_matrix(simulate_votes(gold, 2, 0, specs, 300 + seed), specs.size());
    LabelModelConfig cfg;
    cfg.seed = seed;
    const auto params = fit_label_model(L, cfg, schema);
    const double lm = token_accuracy(lm_hard_labels(predict_proba(L, params, schema), schema), gold);
    const double mv = token_accuracy(majority_vote(L, schema), gold);
    ok = ok && lm - mv >= 0.05;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%+.1fpp", detail.empty() ? "" : " ", 100 * (lm - mv));
    detail += buf;
  }
  return {ok, "LM - MV per seed:" + detail + " (>= +5pp)"};
}

// 3 -------------------------------------------------------------------------
Outcome equal_accuracy_is_mv() {
  const int k = 3;
  const size_t m = 7, n = 10000;
  TaskSchema schema;
  schema.k = k;
  schema.class_names = {"O", "A", "B"};
  Rng rng(31);
  std::vector<int8_t> v(n * m);
  for (auto& x : v) x = rng.bernoulli(0.5) ? static_cast<int8_t>(rng.below(k)) : static_cast<int8_t>(kAbstain);
  const LabelMatrix L = as_matrix(v, m);
  LabelModelParams p;
  p.k = k;
  p.source_names = L.source_names;
  p.accuracies.assign(m, std::vector<double>(k, 0.6));
  p.class_prior.assign(k, 1.0 / k);
  p.coverage.assign(m, 0.5);
  const auto lm = lm_hard_labels(predict_proba(L, p, schema), schema);
  const auto mv = majority_vote(L, schema);
  size_t checked = 0, agree = 0;
  for (size_t i = 0; i < n; ++i) {
    std::vector<int> counts(k, 0);
    for (int x : L.row(i))
      if (x != kAbstain) ++counts[static_cast<size_t>(x)];
    const int top = *std::max_element(counts.begin(), counts.end());
    if (top == 0 || std::count(counts.begin(), counts.end(), top) != 1) continue;
    ++checked;
    agree += lm[i] == mv[i];
  }
  return {checked > 0 && agree == checked, std::to_string(agree) + "/" + std::to_string(checked) + " unique-mode rows agree"};
}

// 4 -------------------------------------------------------------------------
Outcome triplet_exactness() {
  MomentMatrix O;
  O.m = 3;
  O.value.assign(9, 0.0);
  O.observed.assign(9, 1);
  auto set = [&](size_t i, size_t j, double x) { O.value[i * 3 + j] = O.value[j * 3 + i] = x; };
  set(0, 1, 0.48);
  set(0, 2, 0.32);
  set(1, 2, 0.24);
  const auto est = triplet_estimates(O);
  const double want[3] = {0.8, 0.6, 0.4};
  double worst = 0;
  for (size_t i = 0; i < 3; ++i) {
    if (!est[i]) return {false, "source without estimate"};
    worst = std::max(worst, std::abs(*est[i] - want[i]));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max error %.2e (< 1e-12)", worst);
  return {worst < 1e-12, buf};
}

// 5 -------------------------------------------------------------------------
Outcome gradient_check() {
  Rng rng(55);
  double worst_grad = 0, worst_ce = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(3));
    const uint32_t dim = 64;
    LinearTokenModel model(k, dim);
    for (auto& w : model.weights) w = rng.normal() * 0.5;
    std::vector<FeatureVector> feats;
    std::vector<double> post;
    std::vector<uint8_t> mask;
    for (size_t i = 0, n = 1 + rng.below(6); i < n; ++i) {
      FeatureVector f;
      for (size_t j = 0, nf = 1 + rng.below(5); j < nf; ++j) f.push_back(static_cast<uint32_t>(rng.below(dim)));
      feats.push_back(f);
      std::vector<double> q(static_cast<size_t>(k));
      for (auto& x : q) x = rng.uniform() + 1e-3;
      const double z = std::accumulate(q.begin(), q.end(), 0.0);
      for (double x : q) post.push_back(x / z);
      mask.push_back(i > 0 && rng.bernoulli(0.2));
    }
    const TokenBatch batch{feats, post, mask};
    const LossGrad lg = noise_aware_loss_grad(model, batch);
    for (size_t fi = 0; fi < lg.grad.features.size(); ++fi)
      for (int c = 0; c < k; ++c) {
        const size_t w = static_cast<size_t>(lg.grad.features[fi]) * static_cast<size_t>(k) + static_cast<size_t>(c);
        const double orig = model.weights[w];
        const double eps = 1e-4;
        model.weights[w] = orig + eps;
        const double up = noise_aware_loss(model, batch);
        model.weights[w] = orig - eps;
        const double down = noise_aware_loss(model, batch);
        model.weights[w] = orig;
        const double fd = (up - down) / (2 * eps);
        const double an = lg.grad.values[fi * static_cast<size_t>(k) + static_cast<size_t>(c)];
        worst_grad = std::max(worst_grad, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}));
      }

    // one-hot target against a direct softmax cross-entropy
    std::vector<double> s(static_cast<size_t>(k));
    model.scores(feats[0], s.data());
    const double mx = *std::max_element(s.begin(), s.end());
    double z = 0;
    for (double x : s) z += std::exp(x - mx);
    const std::vector<uint8_t> keep = {0};
    for (int y = 0; y < k; ++y) {
      std::vector<double> onehot(static_cast<size_t>(k), 0.0);
      onehot[static_cast<size_t>(y)] = 1.0;
      const double ce = -(s[static_cast<size_t>(y)] - mx - std::log(z));
      const double l = noise_aware_loss(model, {std::span(&feats[0], 1), onehot, keep});
      worst_ce = std::max(worst_ce, std::abs(l - ce));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "max relative gradient error %.2e (< 1e-5), one-hot CE error %.2e (< 1e-9)",
                worst_grad, worst_ce);
  return {worst_grad < 1e-5 && worst_ce < 1e-9, buf};
}

// 6 -------------------------------------------------------------------------
std::set<std::string> held_out_forms(const fs::path& lexicon) {
  std::set<std::string> out;
  std::istringstream in(read_file(lexicon));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto a = line.find('\t'), b = line.rfind('\t');
    if (a == std::string::npos || b == a) continue;
    if (line.substr(b + 1) == "1") out.insert(line.substr(0, a));
  }
  return out;
}

std::vector<Span> touching(const std::vector<Span>& spans, const std::vector<uint8_t>& flag) {
  std::vector<Span> out;
  for (const auto& s : spans)
    for (size_t i = s.start; i < s.end; ++i)
      if (flag[i]) {
        out.push_back(s);
        break;
      }
  return out;
}

struct PresetRun {
  double seconds = 0;
  std::vector<double> ws, fs, lm, ws_ood, lm_ood;
  size_t recovered = 0;  // entity tokens no source voted on, tagged right by the end model
};

PresetRun run_preset(const fs::path& out) {
  PresetRun r;
  const PipelineConfig cfg = load_pipeline_config(kPreset + "/tier4.json");
  const auto t0 = Clock::now();
  {
    Run run(cfg, out.string());
    run.all();
    run.write_manifest();
  }
  r.seconds = seconds_since(t0);

  const auto ood = held_out_forms(kPreset + "/data/lexicon.tsv");
  const Splits splits = load_splits(cfg);
  const Corpus& test = splits.test;
  const auto rows = test.rows();
  std::vector<uint8_t> is_ood(rows.size(), 0);
  for (size_t i = 0; i < rows.size(); ++i)
    is_ood[i] = ood.count(test.documents[rows[i].doc].sentences[rows[i].sentence].tokens[rows[i].token].text);
  const auto gold = gold_tags(test, cfg.schema);
  const int dflt = cfg.schema.default_class;
  const auto gold_spans = spans_from_rows(gold, rows, dflt);
  const auto gold_ood = touching(gold_spans, is_ood);

  for (uint64_t seed : cfg.seeds) {
    const fs::path dir = out / ("seed-" + std::to_string(seed));
    const auto report = nlohmann::json::parse(read_file(dir / "report.json"));
    r.ws.push_back(report["systems"]["WS"]["f1"]);
    r.fs.push_back(report["systems"]["FS"]["f1"]);
    r.lm.push_back(report["systems"]["LM"]["f1"]);

    const auto probs = read_dataset((dir / "probs_test.jsonl").string());
    const auto lm_tags = lm_hard_labels(probs, cfg.schema);
    const auto ws_tags = predict_tags(read_model((dir / "model.bin").string()), test);
    const auto lm_spans = spans_from_rows(lm_tags, rows, dflt), ws_spans = spans_from_rows(ws_tags, rows, dflt);
    r.lm_ood.push_back(span_prf(touching(lm_spans, is_ood), gold_ood, MatchMode::kExactSpan).f1());
    r.ws_ood.push_back(span_prf(touching(ws_spans, is_ood), gold_ood, MatchMode::kExactSpan).f1());
    for (size_t i = 0; i < rows.size(); ++i)
      r.recovered += probs.mask[i] && gold[i] != dflt && ws_tags[i] == gold[i];
  }
  return r;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Outcome generalization(const PresetRun& r) {
  bool ok = r.seconds < 60.0 && r.ws.size() == 3;
  for (size_t i = 0; i < r.ws.size(); ++i) ok = ok && r.fs[i] - r.ws[i] <= 0.05 && r.ws_ood[i] > r.lm_ood[i];
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "WS %.3f vs FS %.3f (gap <= 0.05); held-out forms WS %.3f > LM %.3f; %zu seeds in %.2f s (< 60)",
                mean(r.ws), mean(r.fs), mean(r.ws_ood), mean(r.lm_ood), r.ws.size(), r.seconds);
  return {ok, buf};
}

// 7 -------------------------------------------------------------------------
Outcome metrics_oracle() {
  Rng rng(707);
  size_t bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 1 + rng.below(40);
    std::vector<int> pt(n), gt(n);
    for (auto& x : pt) x = rng.bernoulli(0.6) ? 0 : 1 + static_cast<int>(rng.below(2));
    for (auto& x : gt) x = rng.bernoulli(0.6) ? 0 : 1 + static_cast<int>(rng.below(2));
    // brute force: enumerate maximal same-class runs directly
    auto runs = [](const std::vector<int>& t) {
      std::set<std::tuple<size_t, size_t, int>> s;
      for (size_t i = 0; i < t.size();) {
        size_t j = i + 1;
        while (j < t.size() && t[j] == t[i]) ++j;
        if (t[i]) s.insert({i, j, t[i]});
        i = j;
      }
      return s;
    };
    const auto P = runs(pt), G = runs(gt);
    size_t tp = 0;
    for (const auto& s : P) tp += G.count(s);
    const auto r = span_prf(extract_spans(io_to_bio(pt, 0)), extract_spans(io_to_bio(gt, 0)), MatchMode::kExactSpan);
    const double p = P.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(P.size());
    const double rc = G.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(G.size());
    const double f = p + rc > 0 ? 2 * p * rc / (p + rc) : 0.0;
    if (r.micro.tp != tp || r.micro.fp != P.size() - tp || r.micro.fn != G.size() - tp || r.f1() != f) ++bad;
  }
  return {bad == 0, std::to_string(1000 - bad) + "/1000 pairs exact"};
}

// 8 -------------------------------------------------------------------------
Outcome partition_sweep() {
  const PipelineConfig cfg = load_pipeline_config(kPreset + "/tier4.json");
  const Resources res = load_resources(cfg);
  const Splits splits = load_splits(cfg);
  std::vector<size_t> s(cfg.terminologies.size());
  std::iota(s.begin(), s.end(), 1);
  const auto a = sweep_partitions(cfg, res, splits, s, cfg.seeds.front());
  const auto b = sweep_partitions(cfg, res, splits, s, cfg.seeds.front());
  bool ok = format_sweep(a) == format_sweep(b) && a.size() == s.size();
  double worst = 1.0;
  for (const auto& row : a) {
    ok = ok && row.lm_f1 >= row.mv_f1;
    worst = std::min(worst, row.lm_f1 - row.mv_f1);
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "s = 1..%zu, min(LM - MV) %+.4f, rerun %s", s.size(), worst,
                format_sweep(a) == format_sweep(b) ? "identical" : "differs");
  return {ok, buf};
}

// 9 -------------------------------------------------------------------------
Outcome pipeline_determinism(const fs::path& first) {
  TempDir second("det");
  run_preset(second.path);
  const auto a = tree(first), b = tree(second.path);
  size_t differ = 0;
  for (const auto& [p, body] : a) differ += !b.count(p) || b.at(p) != body;
  differ += b.size() > a.size() ? b.size() - a.size() : 0;
  return {differ == 0 && !a.empty(), std::to_string(a.size()) + " files, " + std::to_string(differ) + " differ"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %d %s: %s (%s)\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "accuracy recovery", accuracy_recovery);
  report(2, "label model beats majority vote", lm_beats_mv);
  report(3, "equal accuracies reduce to majority vote", equal_accuracy_is_mv);
  report(4, "triplet exactness", triplet_exactness);
  report(5, "noise-aware gradient", gradient_check);

  TempDir first("run");
  PresetRun pr;
  report(6, "end-model generalization", [&] {
    pr = run_preset(first.path);
    return generalization(pr);
  });
  report(7, "metrics oracle", metrics_oracle);
  report(8, "partition sweep", partition_sweep);
  report(9, "pipeline determinism", [&] { return pipeline_determinism(first.path); });

  std::printf("end model recovers %zu entity tokens no source voted on (>= 1): %s\n", pr.recovered,
              pr.recovered >= 1 ? "PASS" : "FAIL");
  failures += pr.recovered < 1;
  return failures;
}
