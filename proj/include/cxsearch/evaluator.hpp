// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "cxsearch/config.hpp"
#include "cxsearch/eval_result.hpp"

namespace cxs {

struct Capabilities {
  bool cnn = false;
  bool mlp = false;
  bool ensemble_vote = false;
  bool deterministic = false;
};

struct EvaluatorContract {
  std::string id;
  Capabilities capabilities;
  DatasetDescriptor dataset;
  /// Epochs each candidate config is trained for.
  int epochs = 10;
  std::chrono::milliseconds timeout{std::chrono::minutes(10)};
};

/// Turns a config into an EvalResult. Implementations handle one request at a
/// time; the pipeline calls `run` rather than `evaluate` directly.
class Evaluator {
 public:
  explicit Evaluator(EvaluatorContract contract) : contract_(std::move(contract)) {}
  virtual ~Evaluator() = default;
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  const EvaluatorContract& contract() const { return contract_; }
  void set_epochs(int epochs) { contract_.epochs = epochs; }

  /// Checks capabilities, forwards to `evaluate`, and turns exceptions into
  /// failed results.
  EvalResult run(const Config& config, std::uint64_t seed);

  /// Trains on train + validation and reports held-out test accuracy in
  /// `best_val_acc`. Evaluators without a test split fall back to `run`.
  virtual EvalResult final_evaluate(const Config& config, int epochs, std::uint64_t seed);

 protected:
  virtual EvalResult evaluate(const Config& config, std::uint64_t seed) = 0;

  EvaluatorContract contract_;
};

/// Exact trainable-parameter count.
///   MLP: sum over consecutive layer pairs of (fan_in + 1) * fan_out.
///   CNN: 9 c_in c_out + c_out per 3x3 conv, 2c per BN layer, c_in c_out + c_out
///        per 1x1 shortcut projection (channel counts differ), and the
///        classifier c_last * classes + classes after global average pooling.
std::int64_t count_params(const MlpArch& arch, int input_features, int num_classes);
std::int64_t count_params(const CnnArch& arch, int input_channels, int num_classes);
std::int64_t count_params(const Config& config, const DatasetDescriptor& dataset);

class IncompatibleArchitecture : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws IncompatibleArchitecture when `config` cannot run on `dataset`: a
/// CNN needs image inputs whose spatial size survives every downsample point,
/// an MLP needs a positive input width.
void check_compatible(const Config& config, const DatasetDescriptor& dataset);

}  // namespace cxs
