// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "cxsearch/config.hpp"

namespace cxs {

enum class Stage { core = 1, advanced = 2, training = 3 };

enum class Scale { linear, log };

/// Which part of a config a hyperparameter record describes.
enum class Feature {
  cnn_channels,   ///< channel count of one conv layer (`layer` is 1-based)
  cnn_depth,      ///< number of conv layers
  mlp_depth,      ///< number of hidden layers
  mlp_node_sum,   ///< hidden nodes summed across layers
  eta,            ///< learning rate, compared in log10
  lambda,         ///< weight decay, compared in log10
  batch_size,
};

struct CnnBounds {
  int min_depth = 4;
  int max_depth = 16;
  int min_first_channels = 16;
  int max_first_channels = 64;
  int max_channels = 512;

  bool operator==(const CnnBounds&) const = default;
};

struct MlpBounds {
  int min_depth = 0;
  int max_depth = 2;
  int min_nodes = 20;
  int max_nodes = 400;

  /// 0-3 hidden layers of 50-1000 nodes, for large datasets.
  static MlpBounds large() { return {0, 3, 50, 1000}; }
  bool operator==(const MlpBounds&) const = default;
};

/// Learning rate and weight decay are sampled as log10 exponents; a weight
/// decay exponent below `lambda_zero_below` becomes lambda = 0.
struct TrainingBounds {
  double min_log_eta = -5.0;
  double max_log_eta = -1.0;
  double min_log_lambda = -6.0;
  double max_log_lambda = -3.0;
  double lambda_zero_below = -5.0;
  int min_batch = 32;
  int max_batch = 512;

  bool operator==(const TrainingBounds&) const = default;
};

/// One searched hyperparameter with the metadata the similarity kernel needs.
/// For log-scaled entries the bounds are log10 exponents.
struct HyperParam {
  std::string name;
  Feature feature = Feature::batch_size;
  int layer = 0;
  double lower = 0.0;
  double upper = 1.0;
  Scale scale = Scale::linear;
  double omega = 3.0;
  double ramp_power = 1.0;
  double weight = 0.0;

  bool operator==(const HyperParam&) const = default;
};

struct SearchSpace {
  Stage stage = Stage::core;
  ArchKind kind = ArchKind::mlp;
  CnnBounds cnn;
  MlpBounds mlp;
  TrainingBounds training;
  std::vector<HyperParam> params;

  bool operator==(const SearchSpace&) const = default;
};

/// Stage 1 space: conv channels per layer (CNN) or hidden depth plus summed
/// nodes (MLP). Every hyperparameter gets omega = 3, r = 1 and equal weight.
SearchSpace core_space(ArchKind kind, const CnnBounds& cnn = {}, const MlpBounds& mlp = {},
                       const TrainingBounds& training = {});

/// Stage 3 space: log10 eta, log10 lambda, batch size.
SearchSpace training_space(ArchKind kind, const TrainingBounds& training = {}, const CnnBounds& cnn = {},
                           const MlpBounds& mlp = {});

/// Stage 2 is a grid search; its space carries bounds only.
SearchSpace advanced_space(ArchKind kind, const CnnBounds& cnn = {}, const MlpBounds& mlp = {},
                           const TrainingBounds& training = {});

/// Rebuild the kernel records of `space` from its bounds (keeps stage/kind).
void rebuild_params(SearchSpace& space, double omega = 3.0, double ramp_power = 1.0);

/// Upper channel bound of 1-based conv layer `layer` reachable under `bounds`.
int max_channels_at(const CnnBounds& bounds, int layer);

/// Structural problems with the space itself; empty when well-formed.
std::vector<std::string> validate(const SearchSpace& space);

/// One message per violated invariant of `config` under `space`'s bounds.
std::vector<std::string> validate(const Config& config, const SearchSpace& space);

std::string_view to_string(Stage stage);
std::string_view to_string(Feature feature);
std::string_view to_string(Scale scale);
Feature parse_feature(std::string_view text);
Scale parse_scale(std::string_view text);

/// Lambda encoded by a sampled log10 exponent, honouring the snap-to-zero rule.
double lambda_from_exponent(double exponent, const TrainingBounds& bounds);

}  // namespace cxs
