// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-form stand-in for network training. Accuracy is a smooth surface
// over config features; t_tr and N_p come from a declared cost model:
//
//   N_p  = count_params(config)
//   t_tr = step_sec * ceil(train_size / batch) + mac_sec * train_size * macs
//
// where macs is the forward multiply-accumulate count of one example (dense
// layers: fan_in * fan_out; 3x3 convs: 9 c_in c_out H W at the layer's
// resolution). The result is a pure function of (config, epochs, seed,
// variant), so the evaluator reports itself deterministic.

#pragma once

#include <cstdint>
#include <string_view>

#include "cxsearch/evaluator.hpp"

namespace cxs {

enum class SyntheticFamily {
  /// Independent optima for eta, lambda and batch size.
  separable,
  /// The best learning rate scales with batch size: log10 eta* = -3 + log10(batch / 256).
  interacting,
};

struct SyntheticSettings {
  SyntheticFamily family = SyntheticFamily::separable;
  /// Standard deviation of additive accuracy noise; 0 disables it.
  double noise = 0.0;
  /// Distinguishes synthetic "datasets": shifts the optima and the noise stream.
  std::uint64_t variant = 0;
  double step_sec = 2e-3;
  double mac_sec = 1e-9;

  bool operator==(const SyntheticSettings&) const = default;
};

/// Forward multiply-accumulates per example.
double forward_macs(const Config& config, const DatasetDescriptor& dataset);

/// Declared per-epoch training time.
double synthetic_t_tr(const Config& config, const DatasetDescriptor& dataset, const SyntheticSettings& settings);

/// Noise-free accuracy after `epochs` epochs.
double synthetic_accuracy(const Config& config, const DatasetDescriptor& dataset, const SyntheticSettings& settings,
                          int epochs);

DatasetDescriptor default_synthetic_dataset(ArchKind kind);

class SyntheticEvaluator final : public Evaluator {
 public:
  SyntheticEvaluator(SyntheticSettings settings, DatasetDescriptor dataset, int epochs = 10);

  const SyntheticSettings& settings() const { return settings_; }

 protected:
  EvalResult evaluate(const Config& config, std::uint64_t seed) override;

 private:
  SyntheticSettings settings_;
};

std::string_view to_string(SyntheticFamily family);
SyntheticFamily parse_synthetic_family(std::string_view text);

}  // namespace cxs
