#include "wsner/labelmodel.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "wsner/kernels.h"
#include "wsner/random.h"

namespace wsner {

using json = nlohmann::json;

std::vector<int> majority_vote(const LabelMatrix& L, const TaskSchema& schema) {
  schema.validate();
  return kernels::majority_vote(L, schema.k, schema.default_class);
}

void LabelModelConfig::validate() const {
  if (epochs < 1) throw Error("label model: epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error("label model: learning_rate must be positive");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw Error("label model: l2 must be >= 0");
  if (!(accuracy_prior >= 0.5 && accuracy_prior < 1.0))
    throw Error("label model: accuracy_prior must lie in [0.5, 1)");
}

MomentMatrix moment_matrix(const LabelMatrix& L, int positive_class) {
  const auto pm = kernels::pairwise_moments(L, positive_class);
  MomentMatrix O;
  O.m = L.m;
  O.value.assign(L.m * L.m, 0.0);
  O.observed.assign(L.m * L.m, 0);
  for (size_t i = 0; i < L.m; ++i)
    for (size_t j = 0; j < L.m; ++j) {
      if (i == j || pm.count[i * L.m + j] == 0) continue;
      O.value[i * L.m + j] = pm.moment(i, j);
      O.observed[i * L.m + j] = 1;
    }
  return O;
}

std::vector<std::optional<double>> triplet_estimates(const MomentMatrix& O) {
  const size_t m = O.m;
  std::vector<std::optional<double>> out(m);
  std::vector<double> est;
  for (size_t i = 0; i < m; ++i) {
    est.clear();
    for (size_t j = 0; j < m; ++j) {
      if (j == i || !O.has(i, j)) continue;
      for (size_t k = j + 1; k < m; ++k) {
        if (k == i || !O.has(i, k) || !O.has(j, k)) continue;
        const double ojk = O.at(j, k);
        if (std::fabs(ojk) < kMinTripletMoment) continue;
        est.push_back(std::sqrt(std::fabs(O.at(i, j) * O.at(i, k) / ojk)));
      }
    }
    if (est.empty()) continue;
    std::sort(est.begin(), est.end());
    const size_t h = est.size() / 2;
    out[i] = est.size() % 2 ? est[h] : 0.5 * (est[h - 1] + est[h]);
  }
  return out;
}

std::vector<double> refine_accuracies(const MomentMatrix& O, std::vector<double> a,
                                      const LabelModelConfig& cfg, double center) {
  const size_t m = O.m;
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j)
      if (O.has(i, j)) pairs.emplace_back(i, j);
  if (pairs.empty()) return a;
  // The penalty of each source is spread over the pairs it belongs to.
  std::vector<double> share(m, 0.0);
  for (const auto& [i, j] : pairs) {
    share[i] += 1.0;
    share[j] += 1.0;
  }
  Rng rng(cfg.seed);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(pairs);
    for (const auto& [i, j] : pairs) {
      const double r = O.at(i, j) - a[i] * a[j];
      const double gi = -2.0 * r * a[j] + 2.0 * cfg.l2 * (a[i] - center) / share[i];
      const double gj = -2.0 * r * a[i] + 2.0 * cfg.l2 * (a[j] - center) / share[j];
      a[i] -= cfg.learning_rate * gi;
      a[j] -= cfg.learning_rate * gj;
    }
  }
  return a;
}

namespace {

std::vector<double> fit_one_vs_rest(const LabelMatrix& L, int cls, const LabelModelConfig& cfg,
                                    const TaskSchema& schema, Warnings* warnings) {
  const double center = 2.0 * cfg.accuracy_prior - 1.0;
  const MomentMatrix O = moment_matrix(L, cls);
  const auto est = triplet_estimates(O);
  std::vector<double> start(L.m);
  for (size_t j = 0; j < L.m; ++j) {
    if (est[j]) {
      start[j] = *est[j];
    } else {
      start[j] = center;
      if (warnings)
        warnings->push_back("source '" + L.source_names[j] + "' has no valid triplet for class '" +
                            schema.name(cls) + "'; using the accuracy prior");
    }
  }
  auto a = refine_accuracies(O, std::move(start), cfg, center);
  for (size_t j = 0; j < L.m; ++j) {
    if (!std::isfinite(a[j])) throw Error("label model diverged; lower the learning rate");
    if (std::fabs(a[j]) > kAccuracyClip) {
      a[j] = std::clamp(a[j], -kAccuracyClip, kAccuracyClip);
      if (warnings)
        warnings->push_back("accuracy of source '" + L.source_names[j] + "' for class '" +
                            schema.name(cls) + "' clipped to " + std::to_string(a[j]));
    }
  }
  return a;
}

}  // namespace

LabelModelParams fit_label_model(const LabelMatrix& L, const LabelModelConfig& cfg,
                                 const TaskSchema& schema, Warnings* warnings) {
  cfg.validate();
  schema.validate();
  L.validate(schema.k);
  if (L.m < 3) throw Error("label model needs at least 3 sources (got " + std::to_string(L.m) + ")");
  if (L.n == 0) throw Error("label model: empty label matrix");

  LabelModelParams p;
  p.k = schema.k;
  p.source_names = L.source_names;
  const auto k = static_cast<size_t>(schema.k);

  p.coverage.assign(L.m, 0.0);
  std::vector<size_t> voted(L.m, 0);
  for (size_t i = 0; i < L.n; ++i)
    for (size_t j = 0; j < L.m; ++j)
      if (L.at(i, j) != kAbstain) ++voted[j];
  for (size_t j = 0; j < L.m; ++j)
    p.coverage[j] = static_cast<double>(voted[j]) / static_cast<double>(L.n);

  // Class prior: majority-vote frequencies over rows with at least one vote,
  // add-one smoothed.
  const auto mv = majority_vote(L, schema);
  std::vector<double> counts(k, 1.0);
  double total = static_cast<double>(k);
  for (size_t i = 0; i < L.n; ++i) {
    const auto row = L.row(i);
    if (std::all_of(row.begin(), row.end(), [](int8_t v) { return v == kAbstain; })) continue;
    counts[static_cast<size_t>(mv[i])] += 1.0;
    total += 1.0;
  }
  for (double& c : counts) c /= total;
  p.class_prior = std::move(counts);

  p.accuracies.assign(L.m, std::vector<double>(k, 0.0));
  if (schema.k == 2) {
    const auto a = fit_one_vs_rest(L, 1, cfg, schema, warnings);
    for (size_t j = 0; j < L.m; ++j) p.accuracies[j] = {a[j], a[j]};
  } else {
    for (int c = 0; c < schema.k; ++c) {
      const auto a = fit_one_vs_rest(L, c, cfg, schema, warnings);
      for (size_t j = 0; j < L.m; ++j) p.accuracies[j][static_cast<size_t>(c)] = a[j];
    }
  }
  return p;
}

ProbabilisticDataset predict_proba(const LabelMatrix& L, const LabelModelParams& p,
                                   const TaskSchema& schema) {
  schema.validate();
  if (p.k != schema.k) throw Error("label model params have k=" + std::to_string(p.k) +
                                   " but the schema has k=" + std::to_string(schema.k));
  if (p.m() != L.m)
    throw Error("label model params cover " + std::to_string(p.m()) + " sources; matrix has " +
                std::to_string(L.m));
  L.validate(schema.k);
  const auto k = static_cast<size_t>(schema.k);

  kernels::PosteriorTable t;
  t.k = schema.k;
  t.m = L.m;
  t.prior = p.class_prior;
  for (double q : p.class_prior) t.log_prior.push_back(std::log(q));
  t.log_agree.resize(L.m * k);
  t.log_disagree.resize(L.m * k);
  for (size_t j = 0; j < L.m; ++j)
    for (size_t v = 0; v < k; ++v) {
      const double a = std::clamp(p.accuracies[j][v], -kAccuracyClip, kAccuracyClip);
      const double acc = 0.5 * (1.0 + a);
      t.log_agree[j * k + v] = std::log(acc);
      t.log_disagree[j * k + v] = std::log((1.0 - acc) / static_cast<double>(k - 1));
    }

  ProbabilisticDataset d;
  d.k = schema.k;
  d.posteriors.assign(L.n * k, 0.0);
  d.mask.assign(L.n, 0);
  d.doc_ids = L.doc_ids;
  d.rows = L.rows;
  kernels::posteriors(L, t, d.posteriors, d.mask);
  return d;
}

std::vector<int> lm_hard_labels(const ProbabilisticDataset& d, const TaskSchema& schema) {
  if (d.k != schema.k) throw Error("dataset class count does not match the schema");
  std::vector<int> out(d.size(), schema.default_class);
  for (size_t i = 0; i < d.size(); ++i) {
    if (d.mask[i]) continue;
    const double* q = d.posterior(i);
    int best = 0;
    bool tie = false;
    for (int c = 1; c < d.k; ++c) {
      if (q[c] > q[best]) {
        best = c;
        tie = false;
      } else if (q[c] == q[best]) {
        tie = true;
      }
    }
    out[i] = tie ? schema.default_class : best;
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_params(const LabelModelParams& p, const std::string& path) {
  json j;
  j["k"] = p.k;
  j["class_prior"] = p.class_prior;
  json sources = json::array();
  for (size_t s = 0; s < p.m(); ++s)
    sources.push_back({{"name", p.source_names[s]},
                       {"accuracy", p.accuracies[s]},
                       {"coverage", p.coverage[s]}});
  j["sources"] = std::move(sources);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: " + path);
}

LabelModelParams read_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  LabelModelParams p;
  try {
    const json j = json::parse(in);
    p.k = j.at("k").get<int>();
    p.class_prior = j.at("class_prior").get<std::vector<double>>();
    for (const auto& s : j.at("sources")) {
      p.source_names.push_back(s.at("name").get<std::string>());
      p.accuracies.push_back(s.at("accuracy").get<std::vector<double>>());
      p.coverage.push_back(s.at("coverage").get<double>());
    }
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  if (p.k < 2 || p.class_prior.size() != static_cast<size_t>(p.k))
    throw Error(path + ": class_prior does not have k entries");
  for (const auto& a : p.accuracies)
    if (a.size() != static_cast<size_t>(p.k)) throw Error(path + ": accuracy does not have k entries");
  return p;
}

void write_dataset(const ProbabilisticDataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  const auto k = static_cast<size_t>(d.k);
  for (size_t i = 0; i < d.size(); ++i) {
    const RowRef& r = d.rows[i];
    json rec;
    rec["doc_id"] = d.doc_ids[r.doc];
    rec["sentence"] = r.sentence;
    rec["token"] = r.token;
    rec["posterior"] = std::vector<double>(d.posteriors.begin() + static_cast<std::ptrdiff_t>(i * k),
                                           d.posteriors.begin() + static_cast<std::ptrdiff_t>((i + 1) * k));
    rec["masked"] = d.mask[i] != 0;
    out << rec.dump() << '\n';
  }
  if (!out) throw Error("write failed: " + path);
}

ProbabilisticDataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  ProbabilisticDataset d;
  d.k = 0;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      const auto id = rec.at("doc_id").get<std::string>();
      if (d.doc_ids.empty() || d.doc_ids.back() != id) d.doc_ids.push_back(id);
      d.rows.push_back({d.doc_ids.size() - 1, rec.at("sentence").get<size_t>(),
                        rec.at("token").get<size_t>()});
      const auto q = rec.at("posterior").get<std::vector<double>>();
      if (d.k == 0) d.k = static_cast<int>(q.size());
      if (q.size() != static_cast<size_t>(d.k) || d.k < 2)
        throw Error("posterior length " + std::to_string(q.size()) + " does not match k=" +
                    std::to_string(d.k));
      d.posteriors.insert(d.posteriors.end(), q.begin(), q.end());
      d.mask.push_back(rec.at("masked").get<bool>() ? 1 : 0);
    } catch (const json::exception& e) {
      throw Error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (d.k == 0) d.k = 2;
  return d;
}

}  // namespace wsner
