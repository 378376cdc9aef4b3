// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/evaluator.hpp"

#include <exception>

namespace cxs {

EvalResult Evaluator::run(const Config& config, std::uint64_t seed) {
  const auto& caps = contract_.capabilities;
  if (config.is_cnn() && !caps.cnn) return EvalResult::failure("evaluator '" + contract_.id + "' does not support CNN configs");
  if (!config.is_cnn() && !caps.mlp) return EvalResult::failure("evaluator '" + contract_.id + "' does not support MLP configs");
  try {
    return evaluate(config, seed);
  } catch (const std::exception& e) {
    return EvalResult::failure(std::string("evaluator threw: ") + e.what());
  }
}

EvalResult Evaluator::final_evaluate(const Config& config, int epochs, std::uint64_t seed) {
  const int saved = contract_.epochs;
  contract_.epochs = epochs;
  EvalResult r = run(config, seed);
  contract_.epochs = saved;
  return r;
}

std::int64_t count_params(const MlpArch& arch, int input_features, int num_classes) {
  std::int64_t total = 0;
  std::int64_t fan_in = input_features;
  for (int nodes : arch.hidden_nodes) {
    total += (fan_in + 1) * nodes;
    fan_in = nodes;
  }
  total += (fan_in + 1) * num_classes;
  return total;
}

std::int64_t count_params(const CnnArch& arch, int input_channels, int num_classes) {
  const int n = static_cast<int>(arch.channels.size());
  std::int64_t total = 0;
  std::int64_t c_in = input_channels;
  for (int c : arch.channels) {
    total += 9 * c_in * c + c;
    c_in = c;
  }
  for (int layer : place_fractional_layers(n, arch.bn_fraction)) total += 2LL * arch.channels[layer - 1];
  for (const auto& block : shortcut_blocks(n, arch.shortcuts)) {
    const std::int64_t from = block.first == 1 ? input_channels : arch.channels[block.first - 2];
    const std::int64_t to = arch.channels[block.last - 1];
    if (from != to) total += from * to + to;
  }
  if (n > 0) total += static_cast<std::int64_t>(arch.channels.back()) * num_classes + num_classes;
  else total += static_cast<std::int64_t>(input_channels) * num_classes + num_classes;
  return total;
}

std::int64_t count_params(const Config& config, const DatasetDescriptor& dataset) {
  if (config.is_cnn()) return count_params(config.cnn(), dataset.channels, dataset.num_classes);
  return count_params(config.mlp(), dataset.flat_features(), dataset.num_classes);
}

void check_compatible(const Config& config, const DatasetDescriptor& dataset) {
  if (dataset.num_classes < 2) throw IncompatibleArchitecture("dataset '" + dataset.name + "' needs at least 2 classes");
  if (config.is_cnn()) {
    if (!dataset.is_image()) {
      throw IncompatibleArchitecture("CNN config needs an image dataset; '" + dataset.name + "' has flat features");
    }
    const auto points = expand_downsampling(config.cnn().channels);
    const int shrink = 1 << points.size();
    if (dataset.height < shrink || dataset.width < shrink) {
      throw IncompatibleArchitecture("input " + std::to_string(dataset.height) + "x" + std::to_string(dataset.width) +
                                     " is too small for " + std::to_string(points.size()) + " downsample points");
    }
  } else if (dataset.flat_features() <= 0) {
    throw IncompatibleArchitecture("MLP config needs a positive input width; dataset '" + dataset.name + "' has none");
  }
}

}  // namespace cxs
