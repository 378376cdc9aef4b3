// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cxsearch/config.hpp"
#include "cxsearch/kernel.hpp"

namespace cxs {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Posterior {
  double mean = 0.0;
  double stddev = 0.0;
};

/// GP regression with a constant prior mean equal to the mean of the
/// observations. The covariance is factorized once; if the factorization
/// fails, diagonal jitter escalates from 1e-10 to 1e-6 before giving up.
class GaussianProcess {
 public:
  static constexpr double kMinJitter = 1e-10;
  static constexpr double kMaxJitter = 1e-6;

  /// `covariance` already includes the observation noise on its diagonal.
  GaussianProcess(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& observations);

  /// `cross` holds k(x*, x_i) for every observation, `self` is k(x*, x*).
  Posterior predict(const Eigen::VectorXd& cross, double self) const;

  double prior_mean() const { return prior_mean_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return alpha_.size(); }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double prior_mean_ = 0.0;
  double jitter_ = 0.0;
};

/// Observations conditioned on by Bayesian optimization.
class GpState {
 public:
  GpState(KernelSpec spec, double noise);

  void add(const Config& config, double value);
  std::size_t size() const { return configs_.size(); }
  const std::vector<Config>& configs() const { return configs_; }
  const std::vector<double>& values() const { return values_; }
  const KernelSpec& spec() const { return spec_; }
  double noise() const { return noise_; }

  /// Observed minimum.
  double best_value() const;
  const Config& best_config() const;
  double mean_value() const;
  /// Full covariance, noise included.
  Eigen::MatrixXd covariance() const;

  /// Fits the GP on the current observations; requires at least one.
  GaussianProcess fit() const;
  Posterior predict(const GaussianProcess& gp, const FeatureVector& candidate) const;

 private:
  KernelSpec spec_;
  double noise_;
  std::vector<Config> configs_;
  std::vector<FeatureVector> features_;
  std::vector<double> values_;
};

Posterior gp_posterior(const GpState& state, const Config& candidate);

/// Minimization form: EI = (f* - mu - xi) Phi(z) + sigma phi(z), with
/// z = (f* - mu - xi) / sigma; 0 when sigma == 0.
double expected_improvement(double mu, double sigma, double f_star, double xi);

double normal_pdf(double z);
double normal_cdf(double z);

}  // namespace cxs
