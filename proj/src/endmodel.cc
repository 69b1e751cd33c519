#include "wsner/endmodel.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "wsner/metrics.h"
#include "wsner/random.h"
#include "wsner/text.h"

namespace wsner {

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string word_shape(std::string_view w) {
  std::string out;
  for (char c : w) {
    char s;
    if (text::is_upper(c))
      s = 'X';
    else if (text::is_lower(c))
      s = 'x';
    else if (text::is_digit(c))
      s = 'd';
    else
      s = c;
    if (out.empty() || out.back() != s) out += s;
  }
  return out;
}

FeatureVector token_features(std::span<const Token> sentence, size_t i, uint32_t dim) {
  FeatureVector f;
  f.reserve(12);
  auto add = [&](std::string_view name, std::string_view value) {
    std::string key(name);
    key += '=';
    key += value;
    f.push_back(static_cast<uint32_t>(fnv1a(key) % dim));
  };
  const std::string& w = sentence[i].text;
  const std::string lw = text::lower(w);
  add("bias", "");
  add("w", w);
  add("lw", lw);
  add("p3", std::string_view(lw).substr(0, 3));
  add("s3", lw.size() > 3 ? std::string_view(lw).substr(lw.size() - 3) : std::string_view(lw));
  add("shape", word_shape(w));
  for (int off : {-2, -1, 1, 2}) {
    const auto j = static_cast<std::ptrdiff_t>(i) + off;
    const std::string name = "w" + std::to_string(off);
    if (j < 0)
      add(name, "<s>");
    else if (j >= static_cast<std::ptrdiff_t>(sentence.size()))
      add(name, "</s>");
    else
      add(name, text::lower(sentence[static_cast<size_t>(j)].text));
  }
  return f;
}

std::vector<FeatureVector> featurize(const Corpus& corpus, uint32_t dim) {
  if (dim == 0) throw Error("feature dimension must be positive");
  const auto offsets = corpus.sentence_offsets();
  std::vector<FeatureVector> out(corpus.token_count());
  const auto docs = static_cast<std::ptrdiff_t>(corpus.documents.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t d = 0; d < docs; ++d) {
    const Document& doc = corpus.documents[static_cast<size_t>(d)];
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      const std::span<const Token> toks(doc.sentences[s].tokens);
      const size_t base = offsets[static_cast<size_t>(d)][s];
      for (size_t t = 0; t < toks.size(); ++t) out[base + t] = token_features(toks, t, dim);
    }
  }
  return out;
}

void EndModelConfig::validate() const {
  if (epochs < 1) throw Error("end model: epochs must be >= 1");
  if (batch_size < 1) throw Error("end model: batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error("end model: learning_rate must be positive");
  if (!(l2 >= 0.0)) throw Error("end model: l2 must be >= 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
    throw Error("end model: warmup_fraction must lie in [0, 1)");
  if (dim == 0) throw Error("end model: dim must be positive");
}

void LinearTokenModel::scores(const FeatureVector& x, double* out) const {
  const auto kk = static_cast<size_t>(k);
  std::fill(out, out + kk, 0.0);
  for (uint32_t f : x) {
    const double* w = weights.data() + static_cast<size_t>(f) * kk;
    for (size_t c = 0; c < kk; ++c) out[c] += w[c];
  }
}

int LinearTokenModel::predict(const FeatureVector& x) const {
  double z[64];
  std::vector<double> big;
  double* s = z;
  if (k > 64) {
    big.resize(static_cast<size_t>(k));
    s = big.data();
  }
  scores(x, s);
  int best = 0;
  for (int c = 1; c < k; ++c)
    if (s[c] > s[best]) best = c;
  return best;
}

namespace {

// Softmax probabilities into p; returns log-sum-exp.
double softmax(const double* z, double* p, size_t k) {
  double mx = z[0];
  for (size_t c = 1; c < k; ++c) mx = std::max(mx, z[c]);
  double sum = 0.0;
  for (size_t c = 0; c < k; ++c) {
    p[c] = std::exp(z[c] - mx);
    sum += p[c];
  }
  for (size_t c = 0; c < k; ++c) p[c] /= sum;
  return mx + std::log(sum);
}

double token_loss(const LinearTokenModel& m, const FeatureVector& x, const double* q,
                  std::vector<double>& z, std::vector<double>& p) {
  const auto k = static_cast<size_t>(m.k);
  m.scores(x, z.data());
  const double lse = softmax(z.data(), p.data(), k);
  double loss = 0.0;
  for (size_t c = 0; c < k; ++c)
    if (q[c] != 0.0) loss -= q[c] * (z[c] - lse);
  return loss;
}

template <typename IndexRange>
LossGrad loss_grad(const LinearTokenModel& m, std::span<const FeatureVector> feats,
                   std::span<const double> post, const IndexRange& idx) {
  const auto k = static_cast<size_t>(m.k);
  LossGrad out;
  std::vector<double> z(k), p(k);
  std::vector<std::pair<uint32_t, size_t>> entries;  // feature, token slot
  std::vector<double> deltas;                        // per token slot: p - q
  size_t n = 0;
  for (size_t i : idx) {
    const double* q = post.data() + i * k;
    out.loss += token_loss(m, feats[i], q, z, p);
    for (size_t c = 0; c < k; ++c) deltas.push_back(p[c] - q[c]);
    for (uint32_t f : feats[i]) entries.emplace_back(f, n);
    ++n;
  }
  if (n == 0) {
    out.all_masked = true;
    return out;
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.loss *= inv;
  std::sort(entries.begin(), entries.end());
  for (const auto& [f, slot] : entries) {
    if (out.grad.features.empty() || out.grad.features.back() != f) {
      out.grad.features.push_back(f);
      out.grad.values.resize(out.grad.values.size() + k, 0.0);
    }
    double* g = out.grad.values.data() + out.grad.values.size() - k;
    for (size_t c = 0; c < k; ++c) g[c] += deltas[slot * k + c] * inv;
  }
  return out;
}

void check_batch(const LinearTokenModel& m, const TokenBatch& b) {
  const auto k = static_cast<size_t>(m.k);
  if (b.posteriors.size() != b.features.size() * k)
    throw Error("batch posteriors do not have k entries per token");
  if (!b.mask.empty() && b.mask.size() != b.features.size())
    throw Error("batch mask is not aligned with the features");
}

std::vector<size_t> unmasked(const TokenBatch& b) {
  std::vector<size_t> idx;
  for (size_t i = 0; i < b.features.size(); ++i)
    if (b.mask.empty() || !b.mask[i]) idx.push_back(i);
  return idx;
}

}  // namespace

LossGrad noise_aware_loss_grad(const LinearTokenModel& model, const TokenBatch& batch) {
  check_batch(model, batch);
  return loss_grad(model, batch.features, batch.posteriors, unmasked(batch));
}

double noise_aware_loss(const LinearTokenModel& model, const TokenBatch& batch) {
  check_batch(model, batch);
  const auto k = static_cast<size_t>(model.k);
  std::vector<double> z(k), p(k);
  double loss = 0.0;
  size_t n = 0;
  for (size_t i : unmasked(batch)) {
    loss += token_loss(model, batch.features[i], batch.posteriors.data() + i * k, z, p);
    ++n;
  }
  return n ? loss / static_cast<double>(n) : 0.0;
}

double scheduled_rate(double base, size_t step, size_t total, double warmup_fraction) {
  const auto warmup = static_cast<size_t>(std::ceil(warmup_fraction * static_cast<double>(total)));
  if (step < warmup) return base * static_cast<double>(step + 1) / static_cast<double>(warmup);
  if (total <= warmup) return base;
  return base * static_cast<double>(total - step) / static_cast<double>(total - warmup);
}

TrainResult train_noise_aware(std::span<const FeatureVector> features, const ProbabilisticDataset& d,
                              const EndModelConfig& cfg, const ValidationFn& validation) {
  cfg.validate();
  if (d.size() == 0) throw Error("end model: empty dataset");
  if (features.size() != d.size())
    throw Error("end model: " + std::to_string(features.size()) + " feature rows for " +
                std::to_string(d.size()) + " dataset rows");
  if (d.k < 2) throw Error("end model: k must be >= 2");
  for (const auto& x : features)
    for (uint32_t f : x)
      if (f >= cfg.dim) throw Error("end model: feature index outside the configured dim");

  TrainResult r;
  r.model = LinearTokenModel(d.k, cfg.dim);
  const auto k = static_cast<size_t>(d.k);
  const TokenBatch all{features, d.posteriors, d.mask};
  std::vector<size_t> order = unmasked(all);
  if (order.empty()) {
    r.warnings.push_back("every token is masked; the model stays at zero");
    r.epoch_loss.assign(static_cast<size_t>(cfg.epochs), 0.0);
    r.best_epoch = cfg.epochs;
    return r;
  }

  const size_t per_epoch = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
  const size_t total = per_epoch * static_cast<size_t>(cfg.epochs);
  Rng rng(cfg.seed);
  LinearTokenModel best;
  double best_score = -INFINITY;
  size_t step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::span<const size_t> idx(order.data() + b, std::min(cfg.batch_size, order.size() - b));
      const LossGrad lg = loss_grad(r.model, features, d.posteriors, idx);
      const double lr = scheduled_rate(cfg.learning_rate, step++, total, cfg.warmup_fraction);
      for (size_t u = 0; u < lg.grad.features.size(); ++u) {
        double* w = r.model.weights.data() + static_cast<size_t>(lg.grad.features[u]) * k;
        const double* g = lg.grad.values.data() + u * k;
        for (size_t c = 0; c < k; ++c) w[c] -= lr * (g[c] + cfg.l2 * w[c]);
      }
    }
    r.epoch_loss.push_back(noise_aware_loss(r.model, all));
    if (validation) {
      const double score = validation(r.model);
      if (score > best_score) {
        best_score = score;
        best = r.model;
        r.best_epoch = epoch;
      }
    }
  }
  if (validation)
    r.model = std::move(best);
  else
    r.best_epoch = cfg.epochs;
  return r;
}

TrainResult train_noise_aware(const ProbabilisticDataset& d, const Corpus& corpus,
                              const EndModelConfig& cfg, const ValidationFn& validation) {
  if (d.size() != corpus.token_count())
    throw Error("end model: dataset has " + std::to_string(d.size()) + " rows but the corpus has " +
                std::to_string(corpus.token_count()) + " tokens");
  const auto feats = featurize(corpus, cfg.dim);
  return train_noise_aware(feats, d, cfg, validation);
}

std::vector<int> predict_tags(const LinearTokenModel& model, std::span<const FeatureVector> features) {
  std::vector<int> out(features.size());
  const auto n = static_cast<std::ptrdiff_t>(features.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] = model.predict(features[static_cast<size_t>(i)]);
  return out;
}

std::vector<int> predict_tags(const LinearTokenModel& model, const Corpus& corpus) {
  return predict_tags(model, featurize(corpus, model.dim));
}

ProbabilisticDataset one_hot_dataset(std::span<const int> labels, const Corpus& corpus, int k) {
  ProbabilisticDataset d;
  d.k = k;
  d.rows = corpus.rows();
  if (labels.size() != d.rows.size()) throw Error("label count does not match the corpus");
  for (const auto& doc : corpus.documents) d.doc_ids.push_back(doc.id);
  d.posteriors.assign(labels.size() * static_cast<size_t>(k), 0.0);
  d.mask.assign(labels.size(), 0);
  for (size_t i = 0; i < labels.size(); ++i)
    d.posteriors[i * static_cast<size_t>(k) + static_cast<size_t>(labels[i])] = 1.0;
  return d;
}

namespace {
template <typename T>
void put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}
template <typename T>
T get(std::istream& in, const std::string& path) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw Error(path + ": truncated model file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}
}  // namespace

// "TRLW", uint32 k, uint32 dim, uint64 nonzeros, then (uint64 index, double).
void write_model(const LinearTokenModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write("TRLW", 4);
  put<uint32_t>(out, static_cast<uint32_t>(model.k));
  put<uint32_t>(out, model.dim);
  uint64_t nz = 0;
  for (double w : model.weights) nz += w != 0.0;
  put<uint64_t>(out, nz);
  for (size_t i = 0; i < model.weights.size(); ++i)
    if (model.weights[i] != 0.0) {
      put<uint64_t>(out, i);
      put<double>(out, model.weights[i]);
    }
  if (!out) throw Error("write failed: " + path);
}

LinearTokenModel read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "TRLW", 4) != 0) throw Error(path + ": not a model file");
  const auto k = get<uint32_t>(in, path);
  const auto dim = get<uint32_t>(in, path);
  if (k < 2 || k > 127 || dim == 0) throw Error(path + ": bad model header");
  LinearTokenModel m(static_cast<int>(k), dim);
  const auto nz = get<uint64_t>(in, path);
  for (uint64_t e = 0; e < nz; ++e) {
    const auto i = get<uint64_t>(in, path);
    const auto w = get<double>(in, path);
    if (i >= m.weights.size()) throw Error(path + ": weight index out of range");
    m.weights[i] = w;
  }
  return m;
}

void export_dataset(const ProbabilisticDataset& d, const Corpus& corpus, const TaskSchema& schema,
                    ExportMode mode, const std::string& path) {
  if (d.size() != corpus.token_count()) throw Error("export: dataset is not aligned with the corpus");
  if (mode == ExportMode::kSoftJsonl) {
    write_dataset(d, path);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  const auto labels = lm_hard_labels(d, schema);
  size_t row = 0;
  for (const auto& doc : corpus.documents)
    for (const auto& s : doc.sentences) {
      const std::span<const int> tags(labels.data() + row, s.tokens.size());
      const auto bio = io_to_bio(tags, schema.default_class);
      for (size_t t = 0; t < s.tokens.size(); ++t)
        out << s.tokens[t].text << ' ' << bio_string(bio[t], schema) << '\n';
      out << '\n';
      row += s.tokens.size();
    }
  if (!out) throw Error("write failed: " + path);
}

}  // namespace wsner
