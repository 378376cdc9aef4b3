// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cxsearch/encoding.hpp"
#include "cxsearch/hash.hpp"

namespace cxs {

double forward_macs(const Config& config, const DatasetDescriptor& dataset) {
  double macs = 0.0;
  if (config.is_cnn()) {
    const auto& a = config.cnn();
    const auto points = expand_downsampling(a.channels);
    double area = static_cast<double>(dataset.height) * dataset.width;
    double c_in = dataset.channels;
    for (std::size_t i = 0; i < a.channels.size(); ++i) {
      macs += 9.0 * c_in * a.channels[i] * area;
      c_in = a.channels[i];
      if (std::find(points.begin(), points.end(), static_cast<int>(i) + 1) != points.end()) area /= 4.0;
    }
    macs += c_in * dataset.num_classes;
  } else {
    double fan_in = dataset.flat_features();
    for (int nodes : config.mlp().hidden_nodes) {
      macs += fan_in * nodes;
      fan_in = nodes;
    }
    macs += fan_in * dataset.num_classes;
  }
  return macs;
}

double synthetic_t_tr(const Config& config, const DatasetDescriptor& dataset, const SyntheticSettings& settings) {
  const double steps = std::ceil(static_cast<double>(dataset.train_size) / config.training.batch_size);
  return settings.step_sec * steps + settings.mac_sec * dataset.train_size * forward_macs(config, dataset);
}

namespace {

double eta_optimum(const Config& config, const SyntheticSettings& settings) {
  // Variants move the optimum by up to +-0.3 decades.
  double opt = -3.0 + 0.1 * (static_cast<double>(splitmix64(settings.variant) % 7) - 3.0);
  if (settings.family == SyntheticFamily::interacting) opt += std::log10(config.training.batch_size / 256.0);
  return opt;
}

double training_penalty(const Config& config, const SyntheticSettings& settings) {
  const auto& t = config.training;
  const double le = std::log10(t.eta);
  const double lb = std::log2(static_cast<double>(t.batch_size));
  const double ll = t.lambda > 0.0 ? std::log10(t.lambda) : -7.0;
  const double de = le - eta_optimum(config, settings);
  double pen = 0.05 * de * de + 0.004 * (ll + 4.5) * (ll + 4.5);
  if (settings.family == SyntheticFamily::separable) pen += 0.004 * (lb - 7.0) * (lb - 7.0);
  else pen += 0.002 * (lb - 8.0) * (lb - 8.0);
  return pen;
}

double mlp_accuracy(const MlpArch& a, double n_params, const DatasetDescriptor& dataset) {
  const double depth = static_cast<double>(a.hidden_nodes.size());
  const double k = 500.0 * dataset.flat_features();
  double acc = 0.62 + 0.25 * (1.0 - std::exp(-n_params / k)) + 0.03 * (1.0 - std::pow(0.5, depth));
  acc -= 0.1 * (a.drop_prob - 0.2) * (a.drop_prob - 0.2);
  return acc;
}

double cnn_accuracy(const CnnArch& a, double n_params) {
  const double depth = static_cast<double>(a.channels.size());
  double acc = 0.55 + 0.25 * (1.0 - std::exp(-n_params / 3e5)) + 0.04 * (1.0 - std::exp(-std::max(0.0, depth - 3.0) / 4.0));
  acc += 0.02 * a.bn_fraction.value();
  const double hidden = a.dropout_fraction.value() * a.hidden_drop_prob;
  acc -= 0.2 * (hidden - 0.22) * (hidden - 0.22) + 0.1 * (a.input_drop_prob - 0.1) * (a.input_drop_prob - 0.1);
  const double deep = std::max(0.0, depth - 8.0);
  switch (a.shortcuts) {
    case ShortcutPolicy::none: acc -= 0.002 * deep; break;
    case ShortcutPolicy::every_4th: acc -= 0.001 * deep; break;
    case ShortcutPolicy::every_other: acc += deep > 0.0 ? 0.003 : -0.001; break;
  }
  for (auto d : a.downsampling) acc += d == Downsample::maxpool ? 0.004 : 0.0;
  return acc;
}

}  // namespace

double synthetic_accuracy(const Config& config, const DatasetDescriptor& dataset, const SyntheticSettings& settings,
                          int epochs) {
  const double n_params = static_cast<double>(count_params(config, dataset));
  const double arch = config.is_cnn() ? cnn_accuracy(config.cnn(), n_params) : mlp_accuracy(config.mlp(), n_params, dataset);
  const double acc = (arch - training_penalty(config, settings)) * (1.0 - 0.3 * std::exp(-epochs / 4.0));
  return std::clamp(acc, 0.0, 1.0);
}

DatasetDescriptor default_synthetic_dataset(ArchKind kind) {
  DatasetDescriptor d;
  d.num_classes = 10;
  d.train_size = 5000;
  if (kind == ArchKind::cnn) {
    d.name = "synthetic-image";
    d.channels = 3;
    d.height = d.width = 32;
  } else {
    d.name = "synthetic-flat";
    d.features = 64;
  }
  return d;
}

SyntheticEvaluator::SyntheticEvaluator(SyntheticSettings settings, DatasetDescriptor dataset, int epochs)
    : Evaluator(EvaluatorContract{"synthetic", {true, true, false, true}, std::move(dataset), epochs, {}}),
      settings_(settings) {}

EvalResult SyntheticEvaluator::evaluate(const Config& config, std::uint64_t seed) {
  const auto& dataset = contract_.dataset;
  check_compatible(config, dataset);
  EvalResult r;
  r.epochs_run = contract_.epochs;
  r.n_params = count_params(config, dataset);
  r.t_tr_sec = synthetic_t_tr(config, dataset, settings_);
  double acc = synthetic_accuracy(config, dataset, settings_, contract_.epochs);
  if (settings_.noise > 0.0) {
    std::mt19937_64 rng(splitmix64(fnv1a(encode(config)) ^ seed ^ splitmix64(settings_.variant)));
    acc = std::clamp(acc + std::normal_distribution<double>(0.0, settings_.noise)(rng), 0.0, 1.0);
  }
  r.best_val_acc = acc;
  return r;
}

std::string_view to_string(SyntheticFamily family) {
  return family == SyntheticFamily::separable ? "separable" : "interacting";
}

SyntheticFamily parse_synthetic_family(std::string_view text) {
  if (text == "separable") return SyntheticFamily::separable;
  if (text == "interacting") return SyntheticFamily::interacting;
  throw std::invalid_argument("unknown synthetic family '" + std::string(text) + "'");
}

}  // namespace cxs
