// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// From-scratch dense network trainer: ReLU hidden layers, softmax
// cross-entropy, Adam with decoupled weight decay, inverted dropout after the
// input and after every hidden layer. Weights use He-scaled normal init and
// biases start at 0.1. The learning rate is multiplied by 0.2 at 1/2 and at
// 3/4 of training.

#pragma once

#include <cstdint>
#include <vector>

#include "cxsearch/dataset.hpp"
#include "cxsearch/evaluator.hpp"

namespace cxs {

struct TrainOutcome {
  /// Accuracy on the evaluation set after every epoch.
  std::vector<double> eval_acc;
  /// Training-pass wall clock of every epoch.
  std::vector<double> epoch_sec;
  std::int64_t n_params = 0;
  /// Euclidean norm of all parameters at the end of training.
  double param_norm = 0.0;
  bool diverged = false;
  int diverged_epoch = -1;
};

TrainOutcome train_mlp(const MlpArch& arch, const TrainingHP& hp, const Dataset& train, const Dataset& eval,
                       int epochs, std::uint64_t seed);

/// Parameter total of the network train_mlp would allocate.
std::int64_t allocated_params(const MlpArch& arch, int input_features, int num_classes);

/// t_tr from per-epoch timings: median of up to 3 epochs after the first
/// (the first epoch is used alone when it is the only one).
double median_warm_epoch(const std::vector<double>& epoch_sec);

class MlpTrainer final : public Evaluator {
 public:
  MlpTrainer(DatasetSplits splits, int epochs = 10);

  const DatasetSplits& splits() const { return splits_; }
  EvalResult final_evaluate(const Config& config, int epochs, std::uint64_t seed) override;

 protected:
  EvalResult evaluate(const Config& config, std::uint64_t seed) override;

 private:
  DatasetSplits splits_;
};

}  // namespace cxs
