// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Search objective: f = f_p + w_c * f_c with f_p = 1 - best validation
// accuracy and f_c = c / c0, where c is the chosen complexity metric of the
// config and c0 the same metric for a high-complexity reference config.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

#include "cxsearch/config.hpp"
#include "cxsearch/eval_result.hpp"
#include "cxsearch/search_space.hpp"

namespace cxs {

class Evaluator;

enum class ComplexityMetric { t_tr, n_params };

struct ObjectiveSpec {
  double w_c = 0.0;
  ComplexityMetric metric = ComplexityMetric::t_tr;
  double c0 = 1.0;

  bool operator==(const ObjectiveSpec&) const = default;
};

/// Scored evaluation with the objective decomposition kept for traces.
struct Score {
  double f = 0.0;
  double f_p = 0.0;
  double f_c = 0.0;
  double metric_value = 0.0;
  bool failed = false;
  EvalResult result;
};

double complexity_of(const EvalResult& result, ComplexityMetric metric);

/// (1 - best_val_acc) + w_c * c / c0; +infinity for failed results.
double score(const EvalResult& result, const ObjectiveSpec& spec);
Score score_result(const EvalResult& result, const ObjectiveSpec& spec);

/// Weight-decay rule used while training hyperparameters are at presets:
/// lambda = I(N_p >= threshold) * N_p / divisor.
enum class LambdaProfile { cnn, mlp_small, mlp_large };

double preset_lambda(std::int64_t n_params, LambdaProfile profile);

/// Fixed choices used during Stages 1 and 2.
struct Presets {
  double eta = 1e-3;
  int batch_size = 256;
  LambdaProfile lambda_profile = LambdaProfile::mlp_small;
  double cnn_drop_prob = 0.3;
  double mlp_drop_prob = 0.2;
  Downsample downsample = Downsample::maxpool;
  /// Conv nets deeper than this get shortcut connections.
  int shortcut_min_depth = 9;

  bool operator==(const Presets&) const = default;
};

Presets default_presets(ArchKind kind);

/// Stage 1 presets for a freshly sampled architecture: BN and dropout after
/// every conv layer, no input dropout, shortcuts every other layer for deep
/// nets, preset downsampling style, preset eta/batch and preset lambda.
Config apply_presets(Config config, const Presets& presets, const DatasetDescriptor& dataset);

/// Recomputes the preset lambda after an architecture change (Stage 2).
Config refresh_preset_lambda(Config config, const Presets& presets, const DatasetDescriptor& dataset);

/// Deepest, widest architecture of `space` with presets applied.
Config maximal_config(const SearchSpace& space, const Presets& presets, const DatasetDescriptor& dataset);

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Measures `metric` once on the maximal config; throws CalibrationError if
/// the evaluator fails or reports a non-positive value.
double calibrate_c0(const SearchSpace& space, Evaluator& evaluator, ComplexityMetric metric, const Presets& presets,
                    std::uint64_t seed);

std::string_view to_string(ComplexityMetric metric);
std::string_view to_string(LambdaProfile profile);
ComplexityMetric parse_metric(std::string_view text);
LambdaProfile parse_lambda_profile(std::string_view text);

}  // namespace cxs
