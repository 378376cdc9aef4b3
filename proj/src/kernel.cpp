// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cxsearch/encoding.hpp"
#include "cxsearch/log.hpp"

namespace cxs {

Extractor extractor_of(Feature feature) {
  switch (feature) {
    case Feature::cnn_channels: return Extractor::per_layer_channels;
    case Feature::mlp_node_sum: return Extractor::sum_nodes;
    case Feature::eta:
    case Feature::lambda: return Extractor::log10;
    case Feature::cnn_depth:
    case Feature::mlp_depth:
    case Feature::batch_size: return Extractor::raw;
  }
  return Extractor::raw;
}

KernelSpec KernelSpec::from_space(const SearchSpace& space) {
  KernelSpec spec;
  spec.kind = space.kind;
  spec.stage = space.stage;
  spec.zero_lambda_exponent = space.training.min_log_lambda;
  for (const auto& p : space.params) {
    spec.components.push_back({p.name, p.feature, p.layer, {p.upper, p.lower, p.omega, p.ramp_power}, p.weight});
  }
  return spec;
}

double ramp_distance(double a, double b, const RampParams& p) {
  const auto clamp = [&](double v) {
    if (v < p.lower || v > p.upper) {
      warn_once("ramp_distance.clamp", "value " + format_double(v) + " outside [" + format_double(p.lower) + ", " +
                                           format_double(p.upper) + "] clamped for distance computation");
      return std::clamp(v, p.lower, p.upper);
    }
    return v;
  };
  const double gap = std::abs(clamp(a) - clamp(b));
  if (gap == 0.0) return 0.0;
  return p.omega * std::pow(gap / (p.upper - p.lower), p.power);
}

double kernel_value(double distance) { return std::exp(-0.5 * distance * distance); }

FeatureVector extract_features(const Config& config, const KernelSpec& spec) {
  if (config.kind() != spec.kind) {
    throw std::invalid_argument("kernel spec built for " + std::string(to_string(spec.kind)) + " configs, got a " +
                                std::string(to_string(config.kind())) + " config");
  }
  FeatureVector out;
  out.reserve(spec.components.size());
  for (const auto& comp : spec.components) {
    switch (comp.feature) {
      case Feature::cnn_channels: {
        if (!config.is_cnn()) throw std::invalid_argument("channel component on a non-CNN config");
        const auto& ch = config.cnn().channels;
        if (comp.layer >= 1 && comp.layer <= static_cast<int>(ch.size())) {
          out.emplace_back(ch[comp.layer - 1]);
        } else {
          out.emplace_back(std::nullopt);
        }
        break;
      }
      case Feature::cnn_depth:
        if (!config.is_cnn()) throw std::invalid_argument("conv depth component on a non-CNN config");
        out.emplace_back(static_cast<double>(config.cnn().channels.size()));
        break;
      case Feature::mlp_depth:
        if (config.is_cnn()) throw std::invalid_argument("hidden depth component on a non-MLP config");
        out.emplace_back(static_cast<double>(config.mlp().hidden_nodes.size()));
        break;
      case Feature::mlp_node_sum: {
        if (config.is_cnn()) throw std::invalid_argument("node-sum component on a non-MLP config");
        const auto& h = config.mlp().hidden_nodes;
        out.emplace_back(static_cast<double>(std::accumulate(h.begin(), h.end(), 0LL)));
        break;
      }
      case Feature::eta: out.emplace_back(std::log10(config.training.eta)); break;
      case Feature::lambda:
        out.emplace_back(config.training.lambda > 0.0 ? std::log10(config.training.lambda) : spec.zero_lambda_exponent);
        break;
      case Feature::batch_size: out.emplace_back(static_cast<double>(config.training.batch_size)); break;
    }
  }
  return out;
}

double feature_similarity(const FeatureVector& a, const FeatureVector& b, const KernelSpec& spec) {
  // Written as 1 - sum_k s_k (1 - sigma_k) so identical configs score exactly 1.
  double deficit = 0.0;
  for (std::size_t k = 0; k < spec.components.size(); ++k) {
    const auto& comp = spec.components[k];
    const auto& x = a[k];
    const auto& y = b[k];
    double d = 0.0;
    if (x && y) {
      d = ramp_distance(*x, *y, comp.ramp);
    } else if (x.has_value() != y.has_value()) {
      d = comp.ramp.omega;
    }
    if (d != 0.0) deficit += comp.weight * (1.0 - kernel_value(d));
  }
  return std::clamp(1.0 - deficit, 0.0, 1.0);
}

double config_similarity(const Config& a, const Config& b, const KernelSpec& spec) {
  return feature_similarity(extract_features(a, spec), extract_features(b, spec), spec);
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Eigen::MatrixXd covariance_matrix(std::span<const FeatureVector> features, const KernelSpec& spec, double noise) {
  if (features.empty()) throw std::invalid_argument("covariance matrix needs at least one config");
  const auto n = static_cast<Eigen::Index>(features.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = feature_similarity(features[i], features[i], spec);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double s = feature_similarity(features[i], features[j], spec);
      cov(i, j) = s;
      cov(j, i) = s;
    }
  }
  const double lowest = min_eigenvalue(cov);
  if (lowest < -kPsdTolerance) {
    throw KernelError("kernel matrix is not positive semi-definite (min eigenvalue " + format_double(lowest) + ")");
  }
  cov.diagonal().array() += noise;
  return cov;
}

Eigen::MatrixXd covariance_matrix(std::span<const Config> configs, const KernelSpec& spec, double noise) {
  std::vector<FeatureVector> features;
  features.reserve(configs.size());
  for (const auto& c : configs) features.push_back(extract_features(c, spec));
  return covariance_matrix(std::span<const FeatureVector>(features), spec, noise);
}

}  // namespace cxs
