// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

namespace cxs {

/// Outcome of training (or simulating) one config.
struct EvalResult {
  /// Best validation accuracy over all epochs, in [0, 1].
  double best_val_acc = 0.0;
  /// Training-pass wall clock per epoch, in seconds.
  double t_tr_sec = 0.0;
  std::int64_t n_params = 0;
  int epochs_run = 0;
  bool failed = false;
  std::string failure_reason;

  static EvalResult failure(std::string reason) {
    EvalResult r;
    r.failed = true;
    r.failure_reason = std::move(reason);
    return r;
  }
};

/// What an evaluator trains on. Flat-feature datasets set `features`; image
/// datasets set `channels`, `height` and `width`.
struct DatasetDescriptor {
  std::string name;
  int features = 0;
  int channels = 0;
  int height = 0;
  int width = 0;
  int num_classes = 0;
  /// Training examples per epoch; used by synthetic cost models.
  int train_size = 0;

  bool is_image() const { return channels > 0 && height > 0 && width > 0; }
  /// Input width seen by an MLP: `features`, or the flattened image.
  int flat_features() const { return features > 0 ? features : channels * height * width; }
  bool operator==(const DatasetDescriptor&) const = default;
};

}  // namespace cxs
