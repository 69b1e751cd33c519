#include <algorithm>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "test_util.h"
#include "wsner/labelers.h"
#include "wsner/random.h"

using namespace wsner;
using wsner::test::make_corpus;
using wsner::test::make_doc;

namespace {

constexpr int A = kAbstain;

TaskSchema drug_schema() {
  TaskSchema s;
  s.k = 3;
  s.class_names = {"O", "DISEASE", "DRUG"};
  return s;
}

std::shared_ptr<TermClassMap> tcm_of(const std::vector<std::pair<std::string, ClassVector>>& entries) {
  auto t = std::make_shared<TermClassMap>();
  for (const auto& [term, v] : entries) t->insert(term_key(term), v, term_token_length(term));
  return t;
}

Sentence sentence_of(const std::string& text) { return tokenize(text).at(0); }

}  // namespace

TEST_CASE("semantic type lf: longest match beats the shorter abstaining term") {
  // "lung" maps to an abstaining type, so it never enters the map
  auto tcm = tcm_of({{"lung cancer", {0, 1}}});
  CHECK(apply_semantic_type_lf(*tcm, sentence_of("lung cancer")) == SentenceVotes{1, 1});
  CHECK(apply_semantic_type_lf(*tcm, sentence_of("the lung was clear")) == SentenceVotes{A, A, A, A});
  auto tie = tcm_of({{"cold", {0.5, 0.5}}});
  CHECK(apply_semantic_type_lf(*tie, sentence_of("a cold day")) == SentenceVotes{A, A, A});
}

TEST_CASE("semantic type lf: slot pattern composes the parenthetical span") {
  auto tcm = tcm_of({{"Tylenol", {0, 0, 1}}, {"Acetaminophen", {0, 0, 1}}});
  const Sentence s = sentence_of("took Tylenol (Acetaminophen) today");
  CHECK(apply_semantic_type_lf(*tcm, s, default_slot_patterns()) == SentenceVotes{A, 2, 2, 2, 2, A});
  // without the pattern only the terms vote
  CHECK(apply_semantic_type_lf(*tcm, s) == SentenceVotes{A, 2, A, 2, A, A});
  const SlotPattern p = parse_slot_pattern("{*} ( {*} )");
  REQUIRE(p.elements.size() == 4);
  CHECK_FALSE(p.elements[0]);
  CHECK(p.elements[1] == "(");
}

TEST_CASE("semantic type lf: spans never overlap within one function") {
  Rng rng(1);
  auto tcm = tcm_of({{"alpha", {0, 1}}, {"alpha beta", {1, 0}}, {"beta gamma", {0, 1}}, {"gamma", {0.5, 0.5}},
                     {"beta", {0, 1}}});
  const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (size_t i = 0, n = 1 + rng.below(10); i < n; ++i) text += words[rng.below(words.size())] + " ";
    const Sentence s = sentence_of(text);
    const auto votes = apply_semantic_type_lf(*tcm, s, default_slot_patterns());
    REQUIRE(votes.size() == s.tokens.size());
    for (int v : votes) CHECK((v == A || v == 0 || v == 1));
    // each greedy match assigns one value across its tokens
    const auto ms = tcm->matcher().longest_matches(s.tokens);
    for (const auto& m : ms)
      for (size_t t = m.begin + 1; t < m.end; ++t) CHECK(votes[t] == votes[m.begin]);
    CHECK(apply_semantic_type_lf(*tcm, s, default_slot_patterns()) == votes);
  }
}

TEST_CASE("synset lf: any_pair needs two distinct members in the document") {
  std::istringstream in("C1\tDuchenne muscular dystrophy\nC1\tDMD\n");
  auto syn = std::make_shared<SynsetIndex>(build_synsets(in));
  auto tcm = tcm_of({{"Duchenne muscular dystrophy", {0, 1}}});
  const Document both = make_doc("d", "Duchenne muscular dystrophy is rare. DMD affects boys.");
  const auto v = apply_synset_lf(*syn, *tcm, both, SynsetMode::kAnyPair);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == SentenceVotes{1, 1, 1, A, A, A});
  CHECK(v[1] == SentenceVotes{1, A, A, A});
  const Document only = make_doc("d", "DMD affects boys.");
  CHECK(apply_synset_lf(*syn, *tcm, only, SynsetMode::kAnyPair) ==
        DocumentVotes{{A, A, A, A}});
  CHECK(synset_classes(*syn, *tcm).at("C1") == 1);
}

TEST_CASE("Schwartz-Hearst long form search") {
  CHECK(find_best_long_form("MI", "myocardial infarction") == "myocardial infarction");
  CHECK(find_best_long_form("DMD", "Duchenne muscular dystrophy") == "Duchenne muscular dystrophy");
  // 'M' never starts a word of "heart attack", so the published alignment fails
  CHECK_FALSE(find_best_long_form("MI", "heart attack"));
  CHECK(accept_abbreviation("MI", "myocardial infarction"));

  const Document d = make_doc("d", "He had a myocardial infarction (MI) in May. The MI was mild.");
  const auto pairs = find_abbreviations(d);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].short_text == "MI");
  CHECK(pairs[0].long_text == "myocardial infarction");
}

TEST_CASE("synset lf: Schwartz-Hearst mode") {
  auto syn = std::make_shared<SynsetIndex>();
  auto tcm = tcm_of({{"heart attack", {0, 1}}, {"myocardial infarction", {0, 1}}});
  // no alignment for this pair: abstain everywhere
  const Document ha = make_doc("d", "history of heart attack (MI) noted. MI again.");
  for (const auto& sv : apply_synset_lf(*syn, *tcm, ha, SynsetMode::kSchwartzHearst))
    for (int v : sv) CHECK(v == A);
  const Document mi = make_doc("d", "history of myocardial infarction (MI) noted. MI again.");
  const auto v = apply_synset_lf(*syn, *tcm, mi, SynsetMode::kSchwartzHearst);
  REQUIRE(v.size() == 2);
  CHECK(v[0][5] == 1);
  CHECK(v[1][0] == 1);
  CHECK(v[1][1] == A);
}

TEST_CASE("pattern lf") {
  const Document d = make_doc("d", "an ACE inhibitor today");
  const PatternSet p({"(ACEi|ACE inhibitor[s]*)"});
  CHECK(apply_pattern_lf(p, 1, d, d.sentences[0]) == SentenceVotes{A, 1, 1, A});
  const Document ab = make_doc("d", "antibody levels");
  CHECK(apply_pattern_lf(PatternSet({"anti[a-z]+"}), 0, ab, ab.sentences[0]) == SentenceVotes{0, A});
  CHECK(apply_pattern_lf(PatternSet({"zzz"}), 1, ab, ab.sentences[0]) == SentenceVotes{A, A});
  CHECK_THROWS_AS(PatternSet({"(unclosed"}), Error);
  CHECK(apply_pattern_lf(PatternSet({"ANTIBODY"}, true), 1, ab, ab.sentences[0]) == SentenceVotes{1, A});
}

TEST_CASE("guideline dictionary lf") {
  const auto g = GuidelineDictionary::build({"chest pain"}, {"syndrome"}, 1, 0);
  CHECK(apply_guideline_dict_lf(g, sentence_of("chest pain , syndrome and 5 fevers")) ==
        SentenceVotes{1, 1, 0, 0, 0, 0, A});
  auto quiet = g;
  quiet.vote_stopwords = quiet.vote_numbers = quiet.vote_punctuation = false;
  CHECK(apply_guideline_dict_lf(quiet, sentence_of("chest pain , syndrome and 5 fevers")) ==
        SentenceVotes{1, 1, A, 0, A, A, A});
  CHECK_THROWS_AS(GuidelineDictionary::build({"rash"}, {"Rash"}, 1, 0), Error);
}

TEST_CASE("cue window lf") {
  CueRule r;
  r.patterns = {"no evidence of"};
  r.direction = CueDirection::kLeft;
  r.window = 6;
  r.label = 1;
  r.terminators = {"but"};
  const CueMatcher m(r);
  const Document d = make_doc("d", "no evidence of pneumonia");
  CHECK(apply_cue_window_lf(m, d, std::vector<TokenSpan>{{0, 3, 4}}) == std::vector<int>{1});
  const Document none = make_doc("d", "patient has pneumonia");
  CHECK(apply_cue_window_lf(m, none, std::vector<TokenSpan>{{0, 2, 3}}) == std::vector<int>{A});
  const Document term = make_doc("d", "no evidence of fever but pneumonia");
  CHECK(apply_cue_window_lf(m, term, std::vector<TokenSpan>{{0, 5, 6}}) == std::vector<int>{A});
  // window limit
  const Document far = make_doc("d", "no evidence of a b c d e f pneumonia");
  CHECK(apply_cue_window_lf(m, far, std::vector<TokenSpan>{{0, 9, 10}}) == std::vector<int>{A});
  CHECK_THROWS_AS(apply_cue_window_lf(m, d, std::vector<TokenSpan>{{0, 3, 9}}), Error);
  r.window = 0;
  CHECK_THROWS_AS(CueMatcher{r}, Error);
}

TEST_CASE("datetime normalization") {
  const Date ref{std::chrono::year{2020}, std::chrono::month{3}, std::chrono::day{15}};
  CHECK(normalize_datetime("3/14", ref) == Date{std::chrono::year{2020}, std::chrono::month{3}, std::chrono::day{14}});
  CHECK(normalize_datetime("3/14/19", ref) == Date{std::chrono::year{2019}, std::chrono::month{3}, std::chrono::day{14}});
  CHECK(normalize_datetime("2021-01-05", ref) == Date{std::chrono::year{2021}, std::chrono::month{1}, std::chrono::day{5}});
  CHECK(normalize_datetime("March 16", ref) == Date{std::chrono::year{2020}, std::chrono::month{3}, std::chrono::day{16}});
  CHECK_FALSE(normalize_datetime("13/45", ref));
  CHECK_FALSE(normalize_datetime("yesterday", ref));
}

TEST_CASE("nearest datetime lf") {
  const DatetimeMatcher m(DatetimeRule::defaults(0, 1, 2));
  Document d = make_doc("d", "On 3/14 developed fever. On 3/15 rash. On 3/20 follow up visit.");
  d.timestamp = parse_iso_date("2020-03-15");
  const std::vector<TokenSpan> es = {{0, 4, 5}, {1, 3, 4}, {2, 3, 5}};
  CHECK(apply_nearest_datetime_lf(m, d, es) == std::vector<int>{0, 1, 2});

  Document pmh = make_doc("d", "Past medical history: asthma\nNo rash");
  pmh.timestamp = parse_iso_date("2020-03-15");
  // "asthma" sits under the header; "rash" on the next line is still in that section
  CHECK(apply_nearest_datetime_lf(m, pmh, std::vector<TokenSpan>{{0, 4, 5}}) == std::vector<int>{0});

  Document plain = make_doc("d", "patient reports fever");
  plain.timestamp = parse_iso_date("2020-03-15");
  CHECK(apply_nearest_datetime_lf(m, plain, std::vector<TokenSpan>{{0, 2, 3}}) == std::vector<int>{A});

  Warnings w;
  Document bad = make_doc("d", "On 2/30 fever");
  bad.timestamp = parse_iso_date("2020-03-15");
  CHECK(apply_nearest_datetime_lf(m, bad, std::vector<TokenSpan>{{0, 2, 3}}, &w) == std::vector<int>{A});
  CHECK_FALSE(w.empty());
}

TEST_CASE("build_label_matrix: shape, abstain column, hand-computed table") {
  const TaskSchema s = TaskSchema::binary("O", "X");
  auto tcm = tcm_of({{"fever", {0, 1}}, {"cough", {1, 0}}});
  std::vector<LfPtr> lfs = {make_semantic_type_lf("dict", tcm), make_pattern_lf("rx", PatternSet({"zzz"}), 1),
                            make_pattern_lf("ough", PatternSet({"ough"}), 1)};
  const Corpus c = make_corpus({"fever and cough", "no fever"});
  const LabelMatrix L = build_label_matrix(c, lfs, s);
  CHECK(L.n == 5);
  CHECK(L.m == 3);
  CHECK(L.source_names == std::vector<std::string>{"dict", "rx", "ough"});
  const std::vector<int8_t> expected = {1, A, A,  //
                                        A, A, A,  //
                                        0, A, 1,  //
                                        A, A, A,  //
                                        1, A, A};
  CHECK(L.values == expected);
  for (size_t i = 0; i < L.n; ++i) CHECK(L.at(i, 1) == A);
  CHECK(L.rows[3].doc == 1);
  CHECK(L.doc_ids == std::vector<std::string>{"d0", "d1"});

  // one sentence of three tokens, two functions
  const LabelMatrix small = build_label_matrix(make_corpus({"a b c"}), std::span(lfs).first(2), s);
  CHECK(small.n == 3);
  CHECK(small.m == 2);
  CHECK_THROWS_AS(build_label_matrix(c, std::vector<LfPtr>{}, s), Error);
}

namespace {

// Emits the wrong number of votes for one sentence.
class BrokenLf : public LabelingFunction {
 public:
  BrokenLf() : LabelingFunction("broken") {}
  LfKind kind() const override { return LfKind::kPattern; }
  DocumentVotes apply(const Document& doc, std::span<const TokenSpan>) const override {
    DocumentVotes v;
    for (const auto& s : doc.sentences) v.push_back(SentenceVotes(s.tokens.size() + 1, kAbstain));
    return v;
  }
};

class OutOfDomainLf : public LabelingFunction {
 public:
  OutOfDomainLf() : LabelingFunction("wild") {}
  LfKind kind() const override { return LfKind::kPattern; }
  DocumentVotes apply(const Document& doc, std::span<const TokenSpan>) const override {
    DocumentVotes v;
    for (const auto& s : doc.sentences) v.push_back(SentenceVotes(s.tokens.size(), 5));
    return v;
  }
};

}  // namespace

TEST_CASE("build_label_matrix: length mismatch names the function and sentence") {
  const TaskSchema s = TaskSchema::binary("O", "X");
  std::vector<LfPtr> lfs = {std::make_shared<BrokenLf>()};
  try {
    build_label_matrix(make_corpus({"fever now"}), lfs, s);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("broken") != std::string::npos);
    CHECK(msg.find("sentence 0") != std::string::npos);
  }
  std::vector<LfPtr> wild = {std::make_shared<OutOfDomainLf>()};
  CHECK_THROWS_AS(build_label_matrix(make_corpus({"fever now"}), wild, s), Error);
}

TEST_CASE("build_label_matrix: column permutation equivariance and parallel == serial") {
  const TaskSchema s = drug_schema();
  Rng rng(4);
  const std::vector<std::string> words = {"aspirin", "fever", "the", "cough", "ibuprofen", ".", "Rash", "and"};
  std::vector<std::string> texts;
  for (int d = 0; d < 60; ++d) {
    std::string t;
    for (size_t i = 0, n = 1 + rng.below(25); i < n; ++i) t += words[rng.below(words.size())] + " ";
    texts.push_back(t);
  }
  const Corpus c = make_corpus(texts);
  auto tcm = tcm_of({{"aspirin", {0, 0, 1}}, {"fever", {0, 1, 0}}, {"ibuprofen", {0, 0.5, 0.5}}});
  std::vector<LfPtr> lfs = {make_semantic_type_lf("st", tcm), make_pattern_lf("rx", PatternSet({"[Rr]ash"}), 1),
                            make_guideline_dict_lf("g", GuidelineDictionary::build({"cough"}, {"and"}, 1, 0))};
  const LabelMatrix L = build_label_matrix(c, lfs, s);
  const LabelMatrix Ls = build_label_matrix_serial(c, lfs, s);
  CHECK(L.values == Ls.values);
  CHECK(L.source_names == Ls.source_names);

  std::vector<size_t> perm = {2, 0, 1};
  std::vector<LfPtr> permuted;
  for (size_t j : perm) permuted.push_back(lfs[j]);
  const LabelMatrix P = build_label_matrix(c, permuted, s);
  for (size_t i = 0; i < L.n; ++i)
    for (size_t j = 0; j < perm.size(); ++j) CHECK(P.at(i, j) == L.at(i, perm[j]));
  // purity
  CHECK(build_label_matrix(c, lfs, s).values == L.values);
}

TEST_CASE("span-level functions vote on entity head tokens only") {
  TaskSchema s = TaskSchema::binary("AFFIRMED", "NEGATED");
  std::istringstream in(
      "{\"id\":\"a\",\"text\":\"no evidence of lung cancer today\",\"spans\":[[15,26,1]]}\n");
  const Corpus c = ingest_corpus(in, s);
  CueRule r;
  r.patterns = {"no evidence of"};
  std::vector<LfPtr> lfs = {make_cue_window_lf("neg", r)};
  const EntityIndex es = entities_from_gold(c);
  const LabelMatrix L = build_label_matrix(c, lfs, s, &es);
  CHECK(L.values == std::vector<int8_t>{A, A, A, 1, A, A});
}

TEST_CASE("lf kind names round trip") {
  for (LfKind k : {LfKind::kSemanticType, LfKind::kSynset, LfKind::kPattern, LfKind::kGuidelineDict,
                   LfKind::kCueWindow, LfKind::kNearestDatetime})
    CHECK(parse_lf_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_lf_kind("magic"), Error);
}
