// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cxsearch/encoding.hpp"
#include "cxsearch/log.hpp"

namespace cxs {

GaussianProcess::GaussianProcess(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& observations) {
  if (covariance.rows() == 0 || covariance.rows() != covariance.cols() || covariance.rows() != observations.size()) {
    throw std::invalid_argument("GP needs a square covariance matching the observations");
  }
  prior_mean_ = observations.mean();
  llt_.compute(covariance);
  double jitter = kMinJitter;
  while (llt_.info() != Eigen::Success) {
    if (jitter > kMaxJitter * (1.0 + 1e-9)) {
      throw NumericalError("covariance factorization failed even with diagonal jitter " + format_double(kMaxJitter));
    }
    Eigen::MatrixXd jittered = covariance;
    jittered.diagonal().array() += jitter;
    llt_.compute(jittered);
    jitter_ = jitter;
    jitter *= 10.0;
  }
  if (jitter_ > 0.0) log(LogLevel::debug, "GP covariance needed jitter " + format_double(jitter_));
  alpha_ = llt_.solve((observations.array() - prior_mean_).matrix());
}

Posterior GaussianProcess::predict(const Eigen::VectorXd& cross, double self) const {
  const double mean = prior_mean_ + cross.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(cross);
  const double var = std::max(0.0, self - v.squaredNorm());
  return {mean, std::sqrt(var)};
}

GpState::GpState(KernelSpec spec, double noise) : spec_(std::move(spec)), noise_(noise) {
  if (!(noise >= 0.0)) throw std::invalid_argument("GP noise must be non-negative");
}

void GpState::add(const Config& config, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("GP observations must be finite");
  features_.push_back(extract_features(config, spec_));
  configs_.push_back(config);
  values_.push_back(value);
}

double GpState::best_value() const {
  if (values_.empty()) throw std::logic_error("no observations");
  return *std::min_element(values_.begin(), values_.end());
}

const Config& GpState::best_config() const {
  if (values_.empty()) throw std::logic_error("no observations");
  return configs_[std::min_element(values_.begin(), values_.end()) - values_.begin()];
}

double GpState::mean_value() const {
  if (values_.empty()) throw std::logic_error("no observations");
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

Eigen::MatrixXd GpState::covariance() const {
  return covariance_matrix(std::span<const FeatureVector>(features_), spec_, noise_);
}

GaussianProcess GpState::fit() const {
  if (values_.empty()) throw std::logic_error("cannot fit a GP without observations");
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(values_.data(), static_cast<Eigen::Index>(values_.size()));
  return GaussianProcess(covariance(), y);
}

Posterior GpState::predict(const GaussianProcess& gp, const FeatureVector& candidate) const {
  Eigen::VectorXd cross(static_cast<Eigen::Index>(features_.size()));
  for (std::size_t i = 0; i < features_.size(); ++i) {
    cross(static_cast<Eigen::Index>(i)) = feature_similarity(candidate, features_[i], spec_);
  }
  return gp.predict(cross, feature_similarity(candidate, candidate, spec_));
}

Posterior gp_posterior(const GpState& state, const Config& candidate) {
  const auto gp = state.fit();
  return state.predict(gp, extract_features(candidate, state.spec()));
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mu, double sigma, double f_star, double xi) {
  if (!(sigma > 0.0)) return 0.0;
  const double gain = f_star - mu - xi;
  const double z = gain / sigma;
  return std::max(0.0, gain * normal_cdf(z) + sigma * normal_pdf(z));
}

}  // namespace cxs
