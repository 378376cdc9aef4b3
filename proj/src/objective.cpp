// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cxsearch/encoding.hpp"
#include "cxsearch/evaluator.hpp"
#include "cxsearch/sampler.hpp"

namespace cxs {

double complexity_of(const EvalResult& result, ComplexityMetric metric) {
  return metric == ComplexityMetric::t_tr ? result.t_tr_sec : static_cast<double>(result.n_params);
}

Score score_result(const EvalResult& result, const ObjectiveSpec& spec) {
  Score s;
  s.result = result;
  if (result.failed || !std::isfinite(result.best_val_acc)) {
    s.failed = true;
    s.f = s.f_p = std::numeric_limits<double>::infinity();
    return s;
  }
  s.metric_value = complexity_of(result, spec.metric);
  s.f_p = 1.0 - result.best_val_acc;
  s.f_c = s.metric_value / spec.c0;
  s.f = s.f_p + spec.w_c * s.f_c;
  return s;
}

double score(const EvalResult& result, const ObjectiveSpec& spec) { return score_result(result, spec).f; }

namespace {

struct ProfileConstants {
  double threshold;
  double divisor;
};

ProfileConstants constants(LambdaProfile profile) {
  switch (profile) {
    case LambdaProfile::cnn: return {1e6, 1e11};
    case LambdaProfile::mlp_small: return {1e4, 1e9};
    case LambdaProfile::mlp_large: return {1e5, 1e10};
  }
  throw std::invalid_argument("unknown lambda profile");
}

}  // namespace

double preset_lambda(std::int64_t n_params, LambdaProfile profile) {
  const auto [threshold, divisor] = constants(profile);
  const auto n = static_cast<double>(n_params);
  return n >= threshold ? n / divisor : 0.0;
}

Presets default_presets(ArchKind kind) {
  Presets p;
  p.lambda_profile = kind == ArchKind::cnn ? LambdaProfile::cnn : LambdaProfile::mlp_small;
  return p;
}

Config refresh_preset_lambda(Config config, const Presets& presets, const DatasetDescriptor& dataset) {
  config.training.lambda = preset_lambda(count_params(config, dataset), presets.lambda_profile);
  return config;
}

Config apply_presets(Config config, const Presets& presets, const DatasetDescriptor& dataset) {
  if (config.is_cnn()) {
    auto& a = config.cnn();
    a.downsampling.clear();
    sync_downsampling(a, presets.downsample);
    a.bn_fraction = LayerFraction{LayerFraction::kDenominator};
    a.dropout_fraction = LayerFraction{LayerFraction::kDenominator};
    a.input_drop_prob = 0.0;
    a.hidden_drop_prob = presets.cnn_drop_prob;
    a.shortcuts = static_cast<int>(a.channels.size()) >= presets.shortcut_min_depth ? ShortcutPolicy::every_other
                                                                                    : ShortcutPolicy::none;
  } else {
    config.mlp().drop_prob = presets.mlp_drop_prob;
  }
  config.training.eta = presets.eta;
  config.training.batch_size = presets.batch_size;
  return refresh_preset_lambda(std::move(config), presets, dataset);
}

Config maximal_config(const SearchSpace& space, const Presets& presets, const DatasetDescriptor& dataset) {
  Config c;
  if (space.kind == ArchKind::cnn) {
    CnnArch a;
    int ch = space.cnn.max_first_channels;
    for (int i = 0; i < space.cnn.max_depth; ++i) {
      a.channels.push_back(ch);
      ch = std::min(2 * ch, space.cnn.max_channels);
    }
    c.arch = std::move(a);
  } else {
    c.arch = MlpArch{std::vector<int>(static_cast<std::size_t>(space.mlp.max_depth), space.mlp.max_nodes)};
  }
  return apply_presets(std::move(c), presets, dataset);
}

double calibrate_c0(const SearchSpace& space, Evaluator& evaluator, ComplexityMetric metric, const Presets& presets,
                    std::uint64_t seed) {
  const Config reference = maximal_config(space, presets, evaluator.contract().dataset);
  const EvalResult r = evaluator.run(reference, seed);
  if (r.failed) throw CalibrationError("reference config failed to evaluate: " + r.failure_reason);
  const double c0 = complexity_of(r, metric);
  if (!(c0 > 0.0) || !std::isfinite(c0)) {
    throw CalibrationError("reference config reported non-positive " + std::string(to_string(metric)) + " " +
                           format_double(c0));
  }
  return c0;
}

std::string_view to_string(ComplexityMetric metric) {
  return metric == ComplexityMetric::t_tr ? "t_tr" : "n_params";
}

std::string_view to_string(LambdaProfile profile) {
  switch (profile) {
    case LambdaProfile::cnn: return "cnn";
    case LambdaProfile::mlp_small: return "mlp_small";
    case LambdaProfile::mlp_large: return "mlp_large";
  }
  return "?";
}

ComplexityMetric parse_metric(std::string_view text) {
  if (text == "t_tr") return ComplexityMetric::t_tr;
  if (text == "n_params") return ComplexityMetric::n_params;
  throw std::invalid_argument("unknown complexity metric '" + std::string(text) + "' (expected t_tr or n_params)");
}

LambdaProfile parse_lambda_profile(std::string_view text) {
  if (text == "cnn") return LambdaProfile::cnn;
  if (text == "mlp_small") return LambdaProfile::mlp_small;
  if (text == "mlp_large") return LambdaProfile::mlp_large;
  throw std::invalid_argument("unknown lambda profile '" + std::string(text) + "'");
}

}  // namespace cxs
