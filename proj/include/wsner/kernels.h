#ifndef WSNER_KERNELS_H_
#define WSNER_KERNELS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "wsner/corpus.h"
#include "wsner/label_matrix.h"
#include "wsner/matcher.h"

// Data-parallel inner loops. Every kernel has an OpenMP implementation in
// wsner::kernels and a straightforward reference in wsner::kernels::serial;
// the two must agree bit-for-bit (tests/kernels_test.cc checks this).
namespace wsner::kernels {

// Co-vote statistics under a one-vs-rest +-1 encoding: vote == positive_class
// -> +1, any other class -> -1, abstain -> 0. count[i*m+j] is the number of
// rows where both i and j vote; sum[i*m+j] the sum of their vote products.
struct PairMoments {
  size_t m = 0;
  std::vector<int64_t> count;
  std::vector<int64_t> sum;

  double moment(size_t i, size_t j) const {
    const int64_t c = count[i * m + j];
    return c ? static_cast<double>(sum[i * m + j]) / static_cast<double>(c) : 0.0;
  }
};

PairMoments pairwise_moments(const LabelMatrix& L, int positive_class);

// Per-row mode of non-abstain votes; ties and all-abstain rows map to
// default_class.
std::vector<int> majority_vote(const LabelMatrix& L, int k, int default_class);

// Naive-Bayes log factors. For a source j voting v, candidate class y gets
// log_agree[j*k+v] when y == v and log_disagree[j*k+v] otherwise.
struct PosteriorTable {
  int k = 2;
  size_t m = 0;
  std::vector<double> log_prior;
  std::vector<double> prior;
  std::vector<double> log_agree;
  std::vector<double> log_disagree;
};

// Writes n*k posteriors and n mask flags (1 = every source abstained; the
// posterior is then the prior).
void posteriors(const LabelMatrix& L, const PosteriorTable& table, std::span<double> out,
                std::span<uint8_t> mask);

// Per dictionary: sum over documents of the number of distinct keys found by
// greedy longest match in that document.
std::vector<size_t> document_frequency(std::span<const TermSet> dictionaries, const Corpus& corpus);

namespace serial {
PairMoments pairwise_moments(const LabelMatrix& L, int positive_class);
std::vector<int> majority_vote(const LabelMatrix& L, int k, int default_class);
void posteriors(const LabelMatrix& L, const PosteriorTable& table, std::span<double> out,
                std::span<uint8_t> mask);
std::vector<size_t> document_frequency(std::span<const TermSet> dictionaries, const Corpus& corpus);
}  // namespace serial

}  // namespace wsner::kernels

#endif  // WSNER_KERNELS_H_
