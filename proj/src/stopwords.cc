#include <fstream>

#include "wsner/ontology.h"
#include "wsner/text.h"

namespace wsner {

namespace {

// English stopword list, version 1. Changing it changes every downstream
// dictionary, so bump the version comment when editing.
constexpr const char* kEnglishStopwords[] = {
    "i",          "me",       "my",      "myself",   "we",         "our",      "ours",
    "ourselves",  "you",      "your",    "yours",    "yourself",   "yourselves", "he",
    "him",        "his",      "himself", "she",      "her",        "hers",     "herself",
    "it",         "its",      "itself",  "they",     "them",       "their",    "theirs",
    "themselves", "what",     "which",   "who",      "whom",       "this",     "that",
    "these",      "those",    "am",      "is",       "are",        "was",      "were",
    "be",         "been",     "being",   "have",     "has",        "had",      "having",
    "do",         "does",     "did",     "doing",    "a",          "an",       "the",
    "and",        "but",      "if",      "or",       "because",    "as",       "until",
    "while",      "of",       "at",      "by",       "for",        "with",     "about",
    "against",    "between",  "into",    "through",  "during",     "before",   "after",
    "above",      "below",    "to",      "from",     "up",         "down",     "in",
    "out",        "on",       "off",     "over",     "under",      "again",    "further",
    "then",       "once",     "here",    "there",    "when",       "where",    "why",
    "how",        "all",      "any",     "both",     "each",       "few",      "more",
    "most",       "other",    "some",    "such",     "no",         "nor",      "not",
    "only",       "own",      "same",    "so",       "than",       "too",      "very",
    "s",          "t",        "can",     "will",     "just",       "don",      "should",
    "now",        "d",        "ll",      "m",        "o",          "re",       "ve",
    "y",          "ain",      "aren",    "couldn",   "didn",       "doesn",    "hadn",
    "hasn",       "haven",    "isn",     "ma",       "mightn",     "mustn",    "needn",
    "shan",       "shouldn",  "wasn",    "weren",    "won",        "wouldn",
};

}  // namespace

const StopwordSet& default_stopwords() {
  static const StopwordSet words(std::begin(kEnglishStopwords), std::end(kEnglishStopwords));
  return words;
}

StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stopword file '" + path + "'");
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    const auto w = text::trim(line);
    if (w.empty() || w[0] == '#') continue;
    out.insert(text::lower(w));
  }
  return out;
}

}  // namespace wsner
