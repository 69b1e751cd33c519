#ifndef WSNER_LABELMODEL_H_
#define WSNER_LABELMODEL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsner/corpus.h"
#include "wsner/label_matrix.h"

namespace wsner {

std::vector<int> majority_vote(const LabelMatrix& L, const TaskSchema& schema);

struct LabelModelConfig {
  double learning_rate = 0.01;
  int epochs = 100;
  double l2 = 1e-4;
  double accuracy_prior = 0.7;
  uint64_t seed = 0;

  void validate() const;
};

struct LabelModelParams {
  int k = 2;
  std::vector<std::string> source_names;
  // accuracies[j][c]: correlation-scale accuracy of source j for class c
  // (one-vs-rest). For k = 2 both entries hold the same value.
  std::vector<std::vector<double>> accuracies;
  std::vector<double> class_prior;
  std::vector<double> coverage;

  size_t m() const { return source_names.size(); }
};

inline constexpr double kAccuracyClip = 0.98;
inline constexpr double kMinTripletMoment = 1e-6;

// Symmetric m x m co-vote moments with a validity flag per pair (false when
// the two sources never vote together).
struct MomentMatrix {
  size_t m = 0;
  std::vector<double> value;
  std::vector<uint8_t> observed;

  double at(size_t i, size_t j) const { return value[i * m + j]; }
  bool has(size_t i, size_t j) const { return observed[i * m + j] != 0; }
};

MomentMatrix moment_matrix(const LabelMatrix& L, int positive_class);

// Per source: median of sqrt(|O_ij O_ik / O_jk|) over every triplet holding
// it with |O_jk| >= kMinTripletMoment. Sources without a valid triplet get
// nullopt. No clipping.
std::vector<std::optional<double>> triplet_estimates(const MomentMatrix& O);

// Gradient refinement of sum_{i<j} (O_ij - a_i a_j)^2 + l2 sum_i (a_i - center)^2
// starting from `start`. Pairs are visited in a seeded random order each epoch.
std::vector<double> refine_accuracies(const MomentMatrix& O, std::vector<double> start,
                                      const LabelModelConfig& cfg, double center);

LabelModelParams fit_label_model(const LabelMatrix& L, const LabelModelConfig& cfg,
                                 const TaskSchema& schema, Warnings* warnings = nullptr);

struct ProbabilisticDataset {
  int k = 2;
  std::vector<double> posteriors;  // n * k
  std::vector<uint8_t> mask;       // 1 = every source abstained
  std::vector<std::string> doc_ids;
  std::vector<RowRef> rows;

  size_t size() const { return mask.size(); }
  const double* posterior(size_t i) const { return posteriors.data() + i * static_cast<size_t>(k); }
};

ProbabilisticDataset predict_proba(const LabelMatrix& L, const LabelModelParams& p,
                                   const TaskSchema& schema);

std::vector<int> lm_hard_labels(const ProbabilisticDataset& d, const TaskSchema& schema);

void write_params(const LabelModelParams& p, const std::string& path);
LabelModelParams read_params(const std::string& path);

void write_dataset(const ProbabilisticDataset& d, const std::string& path);
ProbabilisticDataset read_dataset(const std::string& path);

}  // namespace wsner

#endif  // WSNER_LABELMODEL_H_
