// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared test helpers: independent numerical oracles and the synthetic suite.
// The oracles deliberately avoid Eigen and the library's own math so that a
// bug on either side shows up as a mismatch.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "cxsearch/manifest.hpp"

namespace cxs::testing {

using Matrix = std::vector<std::vector<double>>;

/// Gauss-Jordan elimination with partial pivoting; solves A X = B column-wise.
inline Matrix gauss_jordan_solve(Matrix a, Matrix b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular matrix");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    const double d = a[col][col];
    for (auto& v : a[col]) v /= d;
    for (auto& v : b[col]) v /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double m = a[r][col];
      for (std::size_t c = 0; c < n; ++c) a[r][c] -= m * a[col][c];
      for (std::size_t c = 0; c < b[r].size(); ++c) b[r][c] -= m * b[col][c];
    }
  }
  return b;
}

struct OraclePosterior {
  double mean;
  double stddev;
};

/// GP posterior with prior mean equal to the observation mean:
///   mu = m + k^T K^-1 (y - m),  var = k** - k^T K^-1 k.
inline OraclePosterior gp_oracle(const Matrix& k_noisy, const std::vector<double>& y, const std::vector<double>& cross,
                                 double self) {
  const std::size_t n = y.size();
  double m = 0.0;
  for (double v : y) m += v;
  m /= static_cast<double>(n);
  Matrix rhs(n, std::vector<double>(2));
  for (std::size_t i = 0; i < n; ++i) rhs[i] = {y[i] - m, cross[i]};
  const Matrix sol = gauss_jordan_solve(k_noisy, rhs);
  double mean = m, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += cross[i] * sol[i][0];
    quad += cross[i] * sol[i][1];
  }
  return {mean, std::sqrt(std::max(0.0, self - quad))};
}

/// E[max(f* - Y - xi, 0)] for Y ~ N(mu, sigma^2) by composite Simpson over
/// [mu - 14 sigma, f* - xi], where the integrand is smooth.
inline double ei_quadrature(double mu, double sigma, double f_star, double xi) {
  const double hi = f_star - xi;
  const double lo = mu - 14.0 * sigma;
  if (hi <= lo) return 0.0;
  const int n = 200000;
  const double h = (hi - lo) / n;
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  auto g = [&](double y) {
    const double z = (y - mu) / sigma;
    return (hi - y) * norm * std::exp(-0.5 * z * z);
  };
  double s = g(lo) + g(hi);
  for (int i = 1; i < n; ++i) s += g(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Number of adjacent pairs that break a non-increasing (or non-decreasing)
/// order; used for sweep trends that tolerate a noise inversion.
inline int inversions(const std::vector<double>& v, bool non_increasing) {
  int count = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (non_increasing ? v[i] > v[i - 1] : v[i] < v[i - 1]) ++count;
  }
  return count;
}

/// Problems of the bundled synthetic suite: both families on MLP and a
/// separable CNN problem, with a small evaluation noise.
struct SuiteProblem {
  std::string name;
  ArchKind kind;
  SyntheticFamily family;
  std::uint64_t variant;
};

inline std::vector<SuiteProblem> synthetic_suite() {
  return {{"mlp-separable", ArchKind::mlp, SyntheticFamily::separable, 1},
          {"mlp-interacting", ArchKind::mlp, SyntheticFamily::interacting, 2},
          {"cnn-separable", ArchKind::cnn, SyntheticFamily::separable, 3}};
}

inline RunManifest suite_manifest(const SuiteProblem& p, std::uint64_t seed, double noise = 0.005) {
  RunManifest m;
  m.name = p.name;
  m.kind = p.kind;
  m.seed = seed;
  m.plan = StagePlan::defaults(p.kind);
  m.evaluator.type = EvaluatorType::synthetic;
  m.evaluator.synthetic.family = p.family;
  m.evaluator.synthetic.noise = noise;
  m.evaluator.synthetic.variant = p.variant;
  return m;
}

/// Fresh scratch directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cxsearch-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cxs::testing
