// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/config.hpp"

#include <stdexcept>

namespace cxs {

std::vector<int> expand_downsampling(std::span<const int> channels) {
  std::vector<int> points;
  for (int threshold : kDownsampleThresholds) {
    for (std::size_t i = 0; i + 1 < channels.size(); ++i) {
      if (channels[i] <= threshold && channels[i + 1] > threshold) {
        const int layer = static_cast<int>(i) + 1;
        // Two thresholds crossed by one step share a single downsample op.
        if (points.empty() || points.back() < layer) points.push_back(layer);
        break;
      }
    }
  }
  return points;
}

std::vector<int> place_fractional_layers(int n_conv, LayerFraction fraction) {
  if (n_conv <= 0 || fraction.quarters <= 0) return {};
  const int den = LayerFraction::kDenominator;
  // round(q * n / den), halves rounded up.
  const int m = std::min(n_conv, (2 * fraction.quarters * n_conv + den) / (2 * den));
  std::vector<int> layers;
  layers.reserve(m);
  for (int j = 1; j <= m; ++j) layers.push_back((n_conv * j + m - 1) / m);
  return layers;
}

std::vector<ShortcutBlock> shortcut_blocks(int n_conv, ShortcutPolicy policy) {
  int spacing = 0;
  switch (policy) {
    case ShortcutPolicy::none: return {};
    case ShortcutPolicy::every_other: spacing = 2; break;
    case ShortcutPolicy::every_4th: spacing = 4; break;
  }
  std::vector<ShortcutBlock> blocks;
  for (int first = 1; first + 1 <= n_conv; first += spacing) blocks.push_back({first, first + 1});
  return blocks;
}

std::string_view to_string(ArchKind kind) { return kind == ArchKind::cnn ? "cnn" : "mlp"; }

std::string_view to_string(Downsample style) { return style == Downsample::stride ? "stride" : "maxpool"; }

std::string_view to_string(ShortcutPolicy policy) {
  switch (policy) {
    case ShortcutPolicy::none: return "none";
    case ShortcutPolicy::every_4th: return "every_4th";
    case ShortcutPolicy::every_other: return "every_other";
  }
  return "none";
}

std::string to_string(LayerFraction fraction) {
  switch (fraction.quarters) {
    case 0: return "0";
    case 1: return "1/4";
    case 2: return "1/2";
    case 3: return "3/4";
    case 4: return "1";
    default: return std::to_string(fraction.quarters) + "/4";
  }
}

ArchKind parse_arch_kind(std::string_view text) {
  if (text == "cnn") return ArchKind::cnn;
  if (text == "mlp") return ArchKind::mlp;
  throw std::invalid_argument("unknown architecture kind '" + std::string(text) + "'");
}

Downsample parse_downsample(std::string_view text) {
  if (text == "stride") return Downsample::stride;
  if (text == "maxpool") return Downsample::maxpool;
  throw std::invalid_argument("unknown downsampling style '" + std::string(text) + "'");
}

ShortcutPolicy parse_shortcut_policy(std::string_view text) {
  if (text == "none") return ShortcutPolicy::none;
  if (text == "every_4th") return ShortcutPolicy::every_4th;
  if (text == "every_other") return ShortcutPolicy::every_other;
  throw std::invalid_argument("unknown shortcut policy '" + std::string(text) + "'");
}

LayerFraction parse_layer_fraction(std::string_view text) {
  if (text == "0") return {0};
  if (text == "1/4") return {1};
  if (text == "1/2" || text == "2/4") return {2};
  if (text == "3/4") return {3};
  if (text == "1" || text == "4/4") return {4};
  throw std::invalid_argument("layer fraction must be one of 0, 1/4, 1/2, 3/4, 1; got '" + std::string(text) + "'");
}

}  // namespace cxs
