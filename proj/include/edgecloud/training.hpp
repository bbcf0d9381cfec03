#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "edgecloud/predictor.hpp"

namespace edgecloud::predictor {

struct TrainOptions {
  int epochs = 200;
  double learning_rate = 0.05;
  std::size_t batch_size = 1;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;  // drives the per-epoch shuffle
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;      // mean BCE over the epoch's samples, pre-update
  double accuracy = 0.0;  // fraction classified correctly, pre-update
};

struct TrainingReport {
  std::vector<EpochStats> epochs;
  double final_loss = 0.0;
  double final_accuracy = 0.0;  // on the training set after the last update
};

/// Mean BCE over `batch` and its gradient with respect to every parameter
/// (backpropagation through time). `grad` is overwritten.
double loss_and_gradient(const PreferencePredictor& predictor, std::span<const LabeledWindow> batch,
                         Parameters& grad);

/// Mean BCE of the predictor over `data`.
double evaluate_loss(const PreferencePredictor& predictor, std::span<const LabeledWindow> data);

/// Fraction of windows whose predicted preference matches the label.
double evaluate_accuracy(const PreferencePredictor& predictor, std::span<const LabeledWindow> data);

/// Mini-batch gradient descent on the BCE loss with global gradient-norm
/// clipping. Deterministic for a given (predictor, data, options).
/// Throws DomainError on empty data or lr <= 0, DivergenceError if the loss
/// or the parameters become non-finite.
TrainingReport train(PreferencePredictor& predictor, std::span<const LabeledWindow> data,
                     const TrainOptions& options);

/// CSV with header `epoch,loss,accuracy`.
void write_training_csv(const TrainingReport& report, const std::filesystem::path& path);

/// Random windows of uniform [0,1] features, ordered in time, labeled
/// compute-preferring iff the last task's accuracy feature exceeds `threshold`.
std::vector<LabeledWindow> make_separable_dataset(std::size_t count, int seq_len, std::uint64_t seed,
                                                  double threshold = 0.65);

}  // namespace edgecloud::predictor
