#include "wsner/kernels.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace wsner::kernels {

namespace {

inline int encode(int vote, int positive_class) {
  if (vote == kAbstain) return 0;
  return vote == positive_class ? 1 : -1;
}

inline void accumulate_row(std::span<const int8_t> row, int positive_class, size_t m,
                           int64_t* count, int64_t* sum) {
  for (size_t i = 0; i < m; ++i) {
    const int a = encode(row[i], positive_class);
    if (!a) continue;
    for (size_t j = i + 1; j < m; ++j) {
      const int b = encode(row[j], positive_class);
      if (!b) continue;
      ++count[i * m + j];
      sum[i * m + j] += a * b;
    }
  }
}

PairMoments symmetrize(PairMoments pm) {
  const size_t m = pm.m;
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j) {
      pm.count[j * m + i] = pm.count[i * m + j];
      pm.sum[j * m + i] = pm.sum[i * m + j];
    }
  return pm;
}

inline int row_mode(std::span<const int8_t> row, int k, int default_class, int* counts) {
  std::fill(counts, counts + k, 0);
  for (int8_t v : row)
    if (v >= 0 && v < k) ++counts[v];
  int best = -1, best_count = 0;
  bool tie = false;
  for (int c = 0; c < k; ++c) {
    if (counts[c] > best_count) {
      best = c;
      best_count = counts[c];
      tie = false;
    } else if (counts[c] == best_count && best_count > 0) {
      tie = true;
    }
  }
  return (best < 0 || tie) ? default_class : best;
}

// Shared by both implementations so results are bit-identical.
inline void row_posterior(std::span<const int8_t> row, const PosteriorTable& t, double* out,
                          uint8_t* mask) {
  const int k = t.k;
  bool any = false;
  for (int y = 0; y < k; ++y) out[y] = t.log_prior[static_cast<size_t>(y)];
  for (size_t j = 0; j < row.size(); ++j) {
    const int v = row[j];
    if (v == kAbstain) continue;
    any = true;
    const size_t idx = j * static_cast<size_t>(k) + static_cast<size_t>(v);
    for (int y = 0; y < k; ++y) out[y] += (y == v) ? t.log_agree[idx] : t.log_disagree[idx];
  }
  if (!any) {
    for (int y = 0; y < k; ++y) out[y] = t.prior[static_cast<size_t>(y)];
    *mask = 1;
    return;
  }
  *mask = 0;
  double mx = out[0];
  for (int y = 1; y < k; ++y) mx = std::max(mx, out[y]);
  double z = 0.0;
  for (int y = 0; y < k; ++y) {
    out[y] = std::exp(out[y] - mx);
    z += out[y];
  }
  for (int y = 0; y < k; ++y) out[y] /= z;
}

size_t distinct_matches(const TermSet& dict, const Document& doc) {
  std::unordered_set<const std::string*> seen;
  for (const auto& s : doc.sentences)
    for (const Match& m : dict.longest_matches(s.tokens)) seen.insert(m.key);
  return seen.size();
}

void check_posterior_shapes(const LabelMatrix& L, const PosteriorTable& t, std::span<double> out,
                            std::span<uint8_t> mask) {
  if (t.m != L.m) throw Error("posterior table has " + std::to_string(t.m) + " sources, matrix has " +
                              std::to_string(L.m));
  if (out.size() != L.n * static_cast<size_t>(t.k) || mask.size() != L.n)
    throw Error("posterior output buffers have the wrong size");
}

}  // namespace

PairMoments pairwise_moments(const LabelMatrix& L, int positive_class) {
  const size_t m = L.m;
  PairMoments pm{m, std::vector<int64_t>(m * m, 0), std::vector<int64_t>(m * m, 0)};
  const auto n = static_cast<std::ptrdiff_t>(L.n);
#pragma omp parallel
  {
    std::vector<int64_t> count(m * m, 0), sum(m * m, 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i)
      accumulate_row(L.row(static_cast<size_t>(i)), positive_class, m, count.data(), sum.data());
#pragma omp critical
    for (size_t x = 0; x < m * m; ++x) {
      pm.count[x] += count[x];
      pm.sum[x] += sum[x];
    }
  }
  return symmetrize(std::move(pm));
}

std::vector<int> majority_vote(const LabelMatrix& L, int k, int default_class) {
  std::vector<int> out(L.n);
  const auto n = static_cast<std::ptrdiff_t>(L.n);
#pragma omp parallel
  {
    std::vector<int> counts(static_cast<size_t>(k));
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      out[static_cast<size_t>(i)] = row_mode(L.row(static_cast<size_t>(i)), k, default_class, counts.data());
  }
  return out;
}

void posteriors(const LabelMatrix& L, const PosteriorTable& table, std::span<double> out,
                std::span<uint8_t> mask) {
  check_posterior_shapes(L, table, out, mask);
  const auto n = static_cast<std::ptrdiff_t>(L.n);
  const auto k = static_cast<size_t>(table.k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<size_t>(i);
    row_posterior(L.row(r), table, out.data() + r * k, mask.data() + r);
  }
}

std::vector<size_t> document_frequency(std::span<const TermSet> dictionaries, const Corpus& corpus) {
  const size_t D = dictionaries.size();
  const size_t docs = corpus.documents.size();
  std::vector<size_t> per_doc(docs * D, 0);
  const auto total = static_cast<std::ptrdiff_t>(docs * D);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t x = 0; x < total; ++x) {
    const auto ux = static_cast<size_t>(x);
    per_doc[ux] = distinct_matches(dictionaries[ux % D], corpus.documents[ux / D]);
  }
  std::vector<size_t> out(D, 0);
  for (size_t x = 0; x < per_doc.size(); ++x) out[x % D] += per_doc[x];
  return out;
}

namespace serial {

PairMoments pairwise_moments(const LabelMatrix& L, int positive_class) {
  const size_t m = L.m;
  PairMoments pm{m, std::vector<int64_t>(m * m, 0), std::vector<int64_t>(m * m, 0)};
  for (size_t i = 0; i < L.n; ++i)
    accumulate_row(L.row(i), positive_class, m, pm.count.data(), pm.sum.data());
  return symmetrize(std::move(pm));
}

std::vector<int> majority_vote(const LabelMatrix& L, int k, int default_class) {
  std::vector<int> out(L.n);
  std::vector<int> counts(static_cast<size_t>(k));
  for (size_t i = 0; i < L.n; ++i) out[i] = row_mode(L.row(i), k, default_class, counts.data());
  return out;
}

void posteriors(const LabelMatrix& L, const PosteriorTable& table, std::span<double> out,
                std::span<uint8_t> mask) {
  check_posterior_shapes(L, table, out, mask);
  const auto k = static_cast<size_t>(table.k);
  for (size_t i = 0; i < L.n; ++i) row_posterior(L.row(i), table, out.data() + i * k, mask.data() + i);
}

std::vector<size_t> document_frequency(std::span<const TermSet> dictionaries, const Corpus& corpus) {
  std::vector<size_t> out(dictionaries.size(), 0);
  for (const auto& doc : corpus.documents)
    for (size_t t = 0; t < dictionaries.size(); ++t) out[t] += distinct_matches(dictionaries[t], doc);
  return out;
}

}  // namespace serial

}  // namespace wsner::kernels
