#include <algorithm>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "test_util.h"
#include "wsner/ontology.h"
#include "wsner/random.h"
#include "wsner/text.h"

using namespace wsner;
using wsner::test::make_corpus;

namespace {

TaskSchema three_class() {
  TaskSchema s;
  s.k = 3;
  s.class_names = {"O", "DISEASE", "CHEMICAL"};
  return s;
}

Terminology from_tsv(const std::string& tsv, const std::string& name) {
  std::istringstream in(tsv);
  return load_terminology(in, name);
}

}  // namespace

TEST_CASE("case normalization keeps abbreviations") {
  CHECK(is_abbreviation("DMD"));
  CHECK(is_abbreviation("q.d."));
  CHECK_FALSE(is_abbreviation("Fever"));
  CHECK_FALSE(is_abbreviation("ABCDEF"));
  CHECK(normalize_case("Lung Cancer") == "lung cancer");
  CHECK(normalize_case("COPD") == "COPD");
  CHECK(term_key("Tylenol (Acetaminophen)") == "tylenol ( acetaminophen )");
  CHECK(term_token_length("Tylenol (Acetaminophen)") == 4);
}

TEST_CASE("preprocess_term drops stopwords, numbers and single characters") {
  const auto& sw = default_stopwords();
  CHECK_FALSE(preprocess_term("the", sw));
  CHECK_FALSE(preprocess_term("2", sw));
  CHECK_FALSE(preprocess_term("1,000", sw));
  CHECK_FALSE(preprocess_term("x", sw));
  CHECK_FALSE(preprocess_term("   ", sw));
  CHECK(preprocess_term("Heart Attack", sw) == "heart attack");
  CHECK(preprocess_term("HIV", sw) == "HIV");
}

TEST_CASE("preprocessing never increases entry count and leaves no short terms") {
  Rng rng(5);
  const std::vector<std::string> pool = {"the", "a", "b", "Fever", "fever", "FEVER", "2", "3.5", "DMD",
                                         "lung cancer", "Lung Cancer", "of", "x", "aspirin", "ASA"};
  for (int trial = 0; trial < 200; ++trial) {
    Terminology t;
    t.name = "t";
    const size_t n = rng.below(10);
    for (size_t i = 0; i < n; ++i) t.entries[pool[rng.below(pool.size())]].insert(rng.bernoulli(0.5) ? "A" : "B");
    const Terminology p = preprocess_terms(t, default_stopwords());
    CHECK(p.entries.size() <= t.entries.size());
    for (const auto& [term, types] : p.entries) {
      CHECK(text::codepoint_length(term) > 1);
      CHECK_FALSE(term.empty());
    }
  }
}

TEST_CASE("load_terminology") {
  const Terminology t = from_tsv("aspirin\tCHEM\naspirin\tCHEM\nlung cancer\tDISO\nlung\tANAT\n\n", "t1");
  CHECK(t.name == "t1");
  CHECK(t.entries.size() == 3);
  CHECK(t.entries.at("aspirin").size() == 1);
  CHECK_THROWS_AS(from_tsv("no tab here\n", "bad"), Error);
  CHECK_THROWS_AS(load_terminology("/nonexistent/t.tsv", "x"), Error);
}

TEST_CASE("class map parsing") {
  const TaskSchema s = three_class();
  const ClassMap cm = parse_class_map(R"({"DISO":"DISEASE","CHEM":2,"ANAT":"abstain"})", s);
  CHECK(cm.lookup("DISO") == 1);
  CHECK(cm.lookup("CHEM") == 2);
  CHECK(cm.lookup("ANAT") == kAbstain);
  CHECK_THROWS_AS(cm.lookup("GENE"), Error);
  const ClassMap fb = parse_class_map(R"({"DISO":"DISEASE","*":"abstain"})", s);
  CHECK(fb.lookup("GENE") == kAbstain);
  CHECK_THROWS_AS(parse_class_map(R"({"DISO":"NOPE"})", s), Error);
  CHECK_THROWS_AS(parse_class_map(R"({"DISO":7})", s), Error);
}

TEST_CASE("term class vectors: uniform over pooled mapped types") {
  const TaskSchema s = three_class();
  const ClassMap cm = parse_class_map(R"({"DISO":1,"CHEM":2,"DRUG":2,"ANAT":"abstain"})", s);
  std::vector<Terminology> ts = {from_tsv("lung cancer\tDISO\nlung\tANAT\ncold\tDISO\n", "a"),
                                 from_tsv("cold\tCHEM\ncold\tDRUG\naspirin\tDRUG\n", "b")};
  const TermClassMap tcm = build_term_class_map(ts, cm, s);
  CHECK(tcm.find("lung") == nullptr);  // only abstain types
  REQUIRE(tcm.find("lung cancer"));
  CHECK(*tcm.find("lung cancer") == ClassVector{0, 1, 0});
  REQUIRE(tcm.find("cold"));
  const ClassVector& cold = *tcm.find("cold");
  CHECK(cold[1] == doctest::Approx(1.0 / 3));
  CHECK(cold[2] == doctest::Approx(2.0 / 3));
  CHECK(argmax_or_abstain(cold) == 2);
  CHECK(argmax_or_abstain({0.0, 0.5, 0.5}) == kAbstain);
}

TEST_CASE("term class vectors sum to one and ignore terminology order") {
  const TaskSchema s = three_class();
  const ClassMap cm = parse_class_map(R"({"T1":1,"T2":2,"T3":0,"T4":"abstain"})", s);
  Rng rng(9);
  const std::vector<std::string> terms = {"alpha", "beta", "gamma", "delta", "alpha beta", "gamma ray"};
  const std::vector<std::string> types = {"T1", "T2", "T3", "T4"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Terminology> ts(4);
    for (size_t i = 0; i < ts.size(); ++i) {
      ts[i].name = "t" + std::to_string(i);
      for (int e = 0; e < 6; ++e) ts[i].entries[terms[rng.below(terms.size())]].insert(types[rng.below(4)]);
    }
    const TermClassMap a = build_term_class_map(ts, cm, s);
    std::reverse(ts.begin(), ts.end());
    const TermClassMap b = build_term_class_map(ts, cm, s);
    CHECK(a.size() == b.size());
    for (const auto& [key, v] : a.matcher().entries()) {
      CHECK(std::accumulate(v.begin(), v.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
      REQUIRE(b.find(key));
      CHECK(*b.find(key) == v);
    }
  }
}

TEST_CASE("synset index drops groups with fewer than two terms") {
  std::istringstream in(
      "C1\tDuchenne muscular dystrophy\nC1\tDMD\n"
      "C2\tthe\nC2\taspirin\n"
      "C3\tfever\nC3\tFever\n");
  const SynsetIndex syn = build_synsets(in);
  CHECK(syn.size() == 1);
  REQUIRE(syn.synsets.count("C1"));
  CHECK(syn.synsets.at("C1") == std::set<std::string>{"duchenne muscular dystrophy", "DMD"});
  CHECK(syn.term_ids.at("DMD") == std::set<std::string>{"C1"});
}

TEST_CASE("dictionary matcher: greedy longest match without overlap") {
  TermSet d;
  for (const std::string t : {"lung", "lung cancer", "cancer stage", "stage"}) d.insert(term_key(t), 0, term_token_length(t));
  const auto sents = tokenize("lung cancer stage two");
  const auto ms = d.longest_matches(sents[0].tokens);
  REQUIRE(ms.size() == 2);
  CHECK(ms[0].begin == 0);
  CHECK(ms[0].end == 2);
  CHECK(*ms[0].key == "lung cancer");
  CHECK(ms[1].begin == 2);
  CHECK(ms[1].end == 3);
  CHECK(d.max_token_length() == 2);
}

TEST_CASE("coverage ranking and partition") {
  // coverage oracle: documents containing each term, summed per terminology
  const Corpus c = make_corpus({"fever and cough", "fever again", "rash", "cough and fever", "fever"});
  std::vector<Terminology> ts = {from_tsv("rash\tX\ncough\tX\n", "small"),
                                 from_tsv("fever\tX\ncough\tX\n", "big"),
                                 from_tsv("sneeze\tX\n", "none")};
  const auto cov = terminology_coverage(ts, c);
  CHECK(cov == std::vector<size_t>{3, 6, 0});

  const PartitionPlan p1 = rank_and_partition(ts, c, 1);
  REQUIRE(p1.ranked.size() == 3);
  CHECK(p1.ranked[0].name == "big");
  CHECK(p1.ranked[1].name == "small");
  CHECK(p1.ranked[2].name == "none");
  REQUIRE(p1.head.size() == 1);
  CHECK(p1.head[0].name == "big");
  CHECK(p1.tail_merged.entries.size() == 3);

  const PartitionPlan p3 = rank_and_partition(ts, c, 3);
  CHECK_FALSE(p3.has_tail());

  // nesting
  const PartitionPlan p2 = rank_and_partition(ts, c, 2);
  for (size_t i = 0; i < p1.head.size(); ++i) CHECK(p2.head[i].name == p1.head[i].name);

  CHECK_THROWS_AS(rank_and_partition(ts, c, 0), Error);
  CHECK_THROWS_AS(rank_and_partition(ts, c, 4), Error);
  CHECK_THROWS_AS(rank_and_partition(ts, Corpus{}, 1), Error);
}

TEST_CASE("coverage ties broken by name, monotone under corpus growth") {
  std::vector<Terminology> ts = {from_tsv("fever\tX\n", "zeta"), from_tsv("cough\tX\n", "alpha")};
  Corpus c = make_corpus({"fever cough"});
  const PartitionPlan p = rank_and_partition(ts, c, 1);
  CHECK(p.ranked[0].name == "alpha");

  Rng rng(2);
  const std::vector<std::string> words = {"fever", "cough", "rash", "and", "the"};
  std::vector<std::string> texts;
  std::vector<size_t> prev(ts.size(), 0);
  for (int i = 0; i < 30; ++i) {
    std::string t;
    for (int w = 0; w < 4; ++w) t += words[rng.below(words.size())] + " ";
    texts.push_back(t);
    const auto cov = terminology_coverage(ts, make_corpus(texts));
    for (size_t j = 0; j < cov.size(); ++j) CHECK(cov[j] >= prev[j]);
    prev = cov;
  }
}
