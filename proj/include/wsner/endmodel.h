#ifndef WSNER_ENDMODEL_H_
#define WSNER_ENDMODEL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wsner/corpus.h"
#include "wsner/labelmodel.h"

namespace wsner {

inline constexpr uint32_t kDefaultFeatureDim = 1u << 18;

using FeatureVector = std::vector<uint32_t>;

uint64_t fnv1a(std::string_view s);

// "Xx", "xx", "d", "X.X" style shape with runs collapsed.
std::string word_shape(std::string_view w);

// Features of one token in its sentence: identity, lowercase, 3-char prefix
// and suffix, shape, neighbours at -2..+2, and a bias feature.
FeatureVector token_features(std::span<const Token> sentence, size_t i, uint32_t dim);

// Features of every corpus row, in row order.
std::vector<FeatureVector> featurize(const Corpus& corpus, uint32_t dim);

struct EndModelConfig {
  double learning_rate = 0.1;
  int epochs = 10;
  size_t batch_size = 32;
  double l2 = 0.0;
  double warmup_fraction = 0.1;
  uint32_t dim = kDefaultFeatureDim;
  uint64_t seed = 0;

  void validate() const;
};

struct LinearTokenModel {
  int k = 2;
  uint32_t dim = kDefaultFeatureDim;
  std::vector<double> weights;  // feature-major: weights[f * k + c]

  LinearTokenModel() = default;
  LinearTokenModel(int k_, uint32_t dim_)
      : k(k_), dim(dim_), weights(static_cast<size_t>(dim_) * static_cast<size_t>(k_), 0.0) {}

  void scores(const FeatureVector& x, double* out) const;
  int predict(const FeatureVector& x) const;
};

struct TokenBatch {
  std::span<const FeatureVector> features;
  std::span<const double> posteriors;  // features.size() * k
  std::span<const uint8_t> mask;       // 1 = excluded
};

// Gradient restricted to the features present in the batch.
struct SparseGradient {
  std::vector<uint32_t> features;  // sorted, unique
  std::vector<double> values;      // features.size() * k
};

struct LossGrad {
  double loss = 0.0;
  SparseGradient grad;
  bool all_masked = false;
};

// Mean over unmasked tokens of -sum_y q(y) log softmax(Wx)_y, with its exact
// gradient. A batch with every token masked has zero loss and gradient.
LossGrad noise_aware_loss_grad(const LinearTokenModel& model, const TokenBatch& batch);

// Loss only, over a whole dataset.
double noise_aware_loss(const LinearTokenModel& model, const TokenBatch& batch);

// Learning rate at `step` of `total`: linear warmup then linear decay to 0.
double scheduled_rate(double base, size_t step, size_t total, double warmup_fraction);

struct TrainResult {
  LinearTokenModel model;
  std::vector<double> epoch_loss;  // full-data loss after each epoch
  int best_epoch = 0;              // 1-based; the returned weights are from here
  Warnings warnings;
};

// Optional per-epoch validation score; the best-scoring epoch's weights are
// returned (earliest on ties). Without it the final weights are returned.
using ValidationFn = std::function<double(const LinearTokenModel&)>;

TrainResult train_noise_aware(std::span<const FeatureVector> features, const ProbabilisticDataset& d,
                              const EndModelConfig& cfg, const ValidationFn& validation = {});
TrainResult train_noise_aware(const ProbabilisticDataset& d, const Corpus& corpus,
                              const EndModelConfig& cfg, const ValidationFn& validation = {});

std::vector<int> predict_tags(const LinearTokenModel& model, std::span<const FeatureVector> features);
std::vector<int> predict_tags(const LinearTokenModel& model, const Corpus& corpus);

// One-hot posteriors from hard labels, nothing masked.
ProbabilisticDataset one_hot_dataset(std::span<const int> labels, const Corpus& corpus, int k);

void write_model(const LinearTokenModel& model, const std::string& path);
LinearTokenModel read_model(const std::string& path);

enum class ExportMode { kHardConll, kSoftJsonl };

// hard_conll: "token BIO" per line, blank line between sentences; masked
// tokens are O. soft_jsonl: the dataset's posterior records.
void export_dataset(const ProbabilisticDataset& d, const Corpus& corpus, const TaskSchema& schema,
                    ExportMode mode, const std::string& path);

}  // namespace wsner

#endif  // WSNER_ENDMODEL_H_
