// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Similarity between configs. Each hyperparameter k contributes a ramp
// distance d_k = omega_k * (|a - b| / (u_k - l_k))^r_k, turned into a
// squared-exponential kernel value exp(-d_k^2 / 2); the config similarity is
// the convex combination sum_k s_k * exp(-d_k^2 / 2). Every per-hyperparameter
// kernel is a squared-exponential kernel of a scalar, so the combined
// covariance matrix is positive semi-definite.

#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cxsearch/config.hpp"
#include "cxsearch/search_space.hpp"

namespace cxs {

struct RampParams {
  double upper = 1.0;
  double lower = 0.0;
  double omega = 3.0;
  double power = 1.0;
};

/// How a component turns a config into the scalar it compares.
enum class Extractor { raw, log10, sum_nodes, per_layer_channels };

Extractor extractor_of(Feature feature);

struct KernelComponent {
  std::string name;
  Feature feature = Feature::batch_size;
  int layer = 0;
  RampParams ramp;
  double weight = 0.0;
};

struct KernelSpec {
  ArchKind kind = ArchKind::mlp;
  Stage stage = Stage::core;
  std::vector<KernelComponent> components;
  /// Substituted for log10(lambda) when lambda == 0.
  double zero_lambda_exponent = -6.0;

  /// Components from the space's hyperparameter records.
  static KernelSpec from_space(const SearchSpace& space);
};

/// Raised when a kernel matrix fails its positive semi-definiteness check;
/// indicates a kernel bug rather than bad input.
class KernelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Inputs outside [lower, upper] are clamped (with a one-time warning).
double ramp_distance(double a, double b, const RampParams& params);

double kernel_value(double distance);

/// Per-component values of one config; nullopt marks a conv layer the config
/// does not have. Precomputing these makes repeated similarity queries cheap.
using FeatureVector = std::vector<std::optional<double>>;

/// Throws std::invalid_argument if the config kind does not match the spec.
FeatureVector extract_features(const Config& config, const KernelSpec& spec);

/// A present and an absent conv layer are at distance omega; two absent
/// layers are identical.
double feature_similarity(const FeatureVector& a, const FeatureVector& b, const KernelSpec& spec);

double config_similarity(const Config& a, const Config& b, const KernelSpec& spec);

/// Sigma_ij = config_similarity(x_i, x_j) plus `noise` on the diagonal. The
/// noise-free matrix is checked for min eigenvalue >= -1e-8.
Eigen::MatrixXd covariance_matrix(std::span<const Config> configs, const KernelSpec& spec, double noise);
Eigen::MatrixXd covariance_matrix(std::span<const FeatureVector> features, const KernelSpec& spec, double noise);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

inline constexpr double kPsdTolerance = 1e-8;

}  // namespace cxs
