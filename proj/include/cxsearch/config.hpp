// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Network configurations: architecture and training hyperparameters, plus the
// deterministic rules that expand a compact architecture description into the
// layer-level placement of downsampling, batch norm, dropout and shortcuts.

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cxs {

enum class ArchKind { cnn, mlp };
enum class Downsample { stride, maxpool };
enum class ShortcutPolicy { none, every_4th, every_other };

/// Fraction of conv layers that receive a BN (or dropout) layer. Restricted to
/// multiples of 1/4 in [0, 1].
struct LayerFraction {
  static constexpr int kDenominator = 4;
  int quarters = kDenominator;

  constexpr double value() const { return static_cast<double>(quarters) / kDenominator; }
  constexpr bool valid() const { return quarters >= 0 && quarters <= kDenominator; }
  auto operator<=>(const LayerFraction&) const = default;
};

struct CnnArch {
  std::vector<int> channels;
  /// One entry per downsample point, in layer order.
  std::vector<Downsample> downsampling;
  LayerFraction bn_fraction{4};
  LayerFraction dropout_fraction{4};
  /// Dropout applied to the network input; 0 disables it.
  double input_drop_prob = 0.0;
  /// Drop probability of the dropout layers placed after conv layers.
  double hidden_drop_prob = 0.3;
  ShortcutPolicy shortcuts = ShortcutPolicy::none;

  bool operator==(const CnnArch&) const = default;
};

struct MlpArch {
  std::vector<int> hidden_nodes;
  /// Dropout after the input and after every hidden layer.
  double drop_prob = 0.2;

  bool operator==(const MlpArch&) const = default;
};

struct TrainingHP {
  double eta = 1e-3;
  double lambda = 0.0;
  int batch_size = 256;

  bool operator==(const TrainingHP&) const = default;
};

struct Config {
  std::variant<CnnArch, MlpArch> arch;
  TrainingHP training;

  ArchKind kind() const { return std::holds_alternative<CnnArch>(arch) ? ArchKind::cnn : ArchKind::mlp; }
  bool is_cnn() const { return kind() == ArchKind::cnn; }
  const CnnArch& cnn() const { return std::get<CnnArch>(arch); }
  CnnArch& cnn() { return std::get<CnnArch>(arch); }
  const MlpArch& mlp() const { return std::get<MlpArch>(arch); }
  MlpArch& mlp() { return std::get<MlpArch>(arch); }

  bool operator==(const Config&) const = default;
};

/// Channel counts at which the feature map is downsampled.
inline constexpr std::array<int, 3> kDownsampleThresholds{64, 128, 256};

/// 1-based indices i of the layers after which a downsample op sits: the
/// channel count crosses a threshold T between layers i and i+1
/// (channels[i-1] <= T < channels[i]). Strictly increasing.
std::vector<int> expand_downsampling(std::span<const int> channels);

/// 1-based indices of the conv layers followed by a BN (or dropout) layer.
/// m = round(fraction * n_conv) layers are chosen at ceil(n_conv * j / m) for
/// j = 1..m, so later layers are preferred.
std::vector<int> place_fractional_layers(int n_conv, LayerFraction fraction);

/// A residual block: the input of conv layer `first` is added to the output of
/// conv layer `last`. A 1x1 projection is used when channel counts differ.
struct ShortcutBlock {
  int first = 0;
  int last = 0;
  bool operator==(const ShortcutBlock&) const = default;
};

/// Blocks skip 2 conv layers and start at layer 1; every_other starts one at
/// every other layer (1, 3, 5, ...), every_4th at every 4th (1, 5, 9, ...).
std::vector<ShortcutBlock> shortcut_blocks(int n_conv, ShortcutPolicy policy);

std::string_view to_string(ArchKind kind);
std::string_view to_string(Downsample style);
std::string_view to_string(ShortcutPolicy policy);
std::string to_string(LayerFraction fraction);

ArchKind parse_arch_kind(std::string_view text);
Downsample parse_downsample(std::string_view text);
ShortcutPolicy parse_shortcut_policy(std::string_view text);
LayerFraction parse_layer_fraction(std::string_view text);

}  // namespace cxs
