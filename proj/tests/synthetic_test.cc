#include <cmath>
#include <sstream>

#include "doctest.h"
#include "test_util.h"
#include "wsner/kernels.h"
#include "wsner/random.h"
#include "wsner/synthetic.h"
#include "wsner/text.h"

using namespace wsner;

namespace {

std::string dump(const Corpus& c) {
  std::ostringstream out;
  write_corpus(c, out);
  return out.str();
}

std::vector<int> random_gold(size_t n, int k, double rate, uint64_t seed) {
  Rng rng(seed);
  std::vector<int> g(n);
  for (auto& x : g) x = rng.bernoulli(rate) ? 1 + static_cast<int>(rng.below(static_cast<uint64_t>(k - 1))) : 0;
  return g;
}

}  // namespace

TEST_CASE("generate_corpus is reproducible from the seed") {
  SyntheticConfig cfg;
  cfg.n_docs = 20;
  cfg.seed = 3;
  const auto a = generate_corpus(cfg), b = generate_corpus(cfg);
  CHECK(dump(a.corpus) == dump(b.corpus));
  CHECK(a.tags == b.tags);
  cfg.seed = 4;
  CHECK(dump(generate_corpus(cfg).corpus) != dump(a.corpus));
}

TEST_CASE("generate_corpus structure") {
  SyntheticConfig cfg;
  cfg.n_docs = 10;
  cfg.k = 3;
  cfg.seed = 1;
  const auto t = generate_corpus(cfg);
  CHECK(t.schema.k == 3);
  CHECK(t.tags.size() == t.corpus.token_count());
  CHECK(t.corpus.documents.size() == 10);
  for (const auto& d : t.corpus.documents) {
    CHECK(d.sentences.size() == cfg.sentences_per_doc);
    for (const auto& s : d.sentences) {
      CHECK(s.tokens.back().text == ".");
      CHECK(text::is_upper(s.tokens.front().text[0]));
    }
  }
  // gold spans reproduce the tags
  std::vector<int> from_spans;
  for (const auto& d : t.corpus.documents) {
    const auto a = align_gold(d, t.corpus.gold_for(d.id), t.schema);
    CHECK(a.warnings.empty());
    for (const auto& s : a.tags) from_spans.insert(from_spans.end(), s.begin(), s.end());
  }
  CHECK(from_spans == t.tags);

  size_t ood = 0;
  for (const auto& f : t.lexicon) ood += f.out_of_dictionary;
  CHECK(static_cast<double>(ood) / static_cast<double>(t.lexicon.size()) == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("entity rate") {
  SyntheticConfig cfg;
  cfg.n_docs = 100;
  cfg.entity_rate = 0.2;
  cfg.seed = 11;
  const auto t = generate_corpus(cfg);
  size_t words = 0, ent = 0;
  for (size_t i = 0; i < t.tags.size(); ++i) {
    const auto r = t.corpus.rows()[i];
    if (t.corpus.documents[r.doc].sentences[r.sentence].tokens[r.token].text == ".") continue;
    ++words;
    ent += t.tags[i] != 0;
  }
  CHECK(std::abs(static_cast<double>(ent) / static_cast<double>(words) - 0.2) <= 0.03);

  cfg.entity_rate = 0.0;
  const auto none = generate_corpus(cfg);
  for (int x : none.tags) CHECK(x == 0);
  CHECK(none.corpus.gold.empty());

  cfg.entity_rate = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("simulate_votes: perfect source copies gold") {
  const auto gold = random_gold(1000, 3, 0.3, 1);
  const std::vector<SourceSpec> specs = {{1.0, 1.0}};
  const auto v = simulate_votes(gold, 3, 0, specs, 2);
  for (size_t i = 0; i < gold.size(); ++i) CHECK(v[i] == gold[i]);
}

TEST_CASE("simulate_votes: empirical accuracy and coverage converge") {
  const size_t n = 50000;
  const auto gold = random_gold(n, 2, 0.3, 5);
  const std::vector<SourceSpec> specs = {{0.7, 1.0}, {0.9, 0.5}, {0.55, 0.8}};
  const auto v = simulate_votes(gold, 2, 0, specs, 6);
  CHECK(v == simulate_votes(gold, 2, 0, specs, 6));
  for (size_t j = 0; j < specs.size(); ++j) {
    size_t voted = 0, right = 0;
    for (size_t i = 0; i < n; ++i) {
      const int x = v[i * specs.size() + j];
      if (x == kAbstain) continue;
      ++voted;
      right += x == gold[i];
    }
    const double p = specs[j].accuracy;
    const double acc = static_cast<double>(right) / static_cast<double>(voted);
    CHECK(std::abs(acc - p) <= 1.96 * std::sqrt(p * (1 - p) / static_cast<double>(voted)) + 1e-12);
    if (j == 0) CHECK(std::abs(acc - 0.7) <= 0.01);
    CHECK(std::abs(static_cast<double>(voted) / n - specs[j].coverage) < 0.01);
  }
}

TEST_CASE("simulate_votes: binary moment identity and independent errors") {
  const size_t n = 50000;
  const auto gold = random_gold(n, 2, 0.5, 8);
  const std::vector<SourceSpec> specs = {{0.9, 1.0}, {0.8, 1.0}};
  const auto v = simulate_votes(gold, 2, 0, specs, 9);
  LabelMatrix L;
  L.n = n;
  L.m = 2;
  L.values = v;
  const auto pm = kernels::pairwise_moments(L, 1);
  CHECK(std::abs(pm.moment(0, 1) - (2 * (0.9 * 0.8 + 0.1 * 0.2) - 1)) < 0.02);

  // error indicator correlation within 3 standard errors of zero
  double se = 0, s0 = 0, s1 = 0, s00 = 0, s11 = 0;
  for (size_t i = 0; i < n; ++i) {
    const double e0 = v[2 * i] != gold[i], e1 = v[2 * i + 1] != gold[i];
    s0 += e0, s1 += e1, s00 += e0 * e0, s11 += e1 * e1, se += e0 * e1;
  }
  const double m0 = s0 / n, m1 = s1 / n;
  const double cov = se / n - m0 * m1;
  const double r = cov / std::sqrt((s00 / n - m0 * m0) * (s11 / n - m1 * m1));
  CHECK(std::abs(r) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("simulate_votes: span_truncate errors on entities vote the default class") {
  const auto gold = random_gold(20000, 3, 0.4, 3);
  SourceSpec s{0.6, 1.0, ErrorMode::kSpanTruncate};
  const auto v = simulate_votes(gold, 3, 0, std::vector<SourceSpec>{s}, 4);
  for (size_t i = 0; i < gold.size(); ++i)
    if (gold[i] != 0 && v[i] != gold[i]) CHECK(v[i] == 0);
}

TEST_CASE("simulate_votes: copied source correlates errors") {
  const size_t n = 20000;
  const auto gold = random_gold(n, 2, 0.5, 1);
  SourceSpec a{0.7, 1.0};
  SourceSpec b{0.7, 1.0};
  b.copy_of = 0;
  b.copy_probability = 0.8;
  const auto v = simulate_votes(gold, 2, 0, std::vector<SourceSpec>{a, b}, 2);
  size_t same = 0;
  for (size_t i = 0; i < n; ++i) same += v[2 * i] == v[2 * i + 1];
  // independent sources would agree 0.7^2 + 0.3^2 = 58% of the time
  CHECK(static_cast<double>(same) / n > 0.85);
  SourceSpec bad = b;
  bad.copy_of = 1;
  CHECK_THROWS_AS(bad.validate(1), Error);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS((SourceSpec{1.5, 1.0}.validate(0)), Error);
  CHECK_THROWS_AS((SourceSpec{0.8, 0.0}.validate(0)), Error);
  CHECK_NOTHROW((SourceSpec{0.8, 1.0}.validate(0)));
}

TEST_CASE("split_corpus keeps documents in order") {
  SyntheticConfig cfg;
  cfg.n_docs = 10;
  const auto t = generate_corpus(cfg);
  const auto s = split_corpus(t.corpus, 0.6, 0.2);
  CHECK(s.train.documents.size() == 6);
  CHECK(s.validation.documents.size() == 2);
  CHECK(s.test.documents.size() == 2);
  CHECK(s.validation.documents[0].id == t.corpus.documents[6].id);
  CHECK(s.train.gold.size() + s.validation.gold.size() + s.test.gold.size() == t.corpus.gold.size());
}
