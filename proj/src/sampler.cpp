// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cxsearch/sobol.hpp"

namespace cxs {
namespace {

int round_between(int lo, int hi, double u) {
  if (hi <= lo) return lo;
  const auto v = std::lround(lo + u * (hi - lo));
  return static_cast<int>(std::clamp<long>(v, lo, hi));
}

int uniform_int(Rng& rng, int lo, int hi) {
  if (hi <= lo) return lo;
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

int next_channel_cap(int previous, const CnnBounds& b) { return std::min(2 * previous, b.max_channels); }

}  // namespace

void sync_downsampling(CnnArch& arch, Downsample fill) {
  const auto points = expand_downsampling(arch.channels);
  arch.downsampling.resize(points.size(), fill);
}

SpaceSampler::SpaceSampler(SearchSpace space, Config base, Finalizer finalize)
    : space_(std::move(space)), base_(std::move(base)), finalize_(std::move(finalize)) {
  if (space_.stage == Stage::advanced) throw std::invalid_argument("the Stage 2 space is a grid and cannot be sampled");
  if (base_.kind() != space_.kind) throw std::invalid_argument("base config kind does not match the search space");
}

int SpaceSampler::dimension() const {
  if (space_.stage == Stage::training) return 3;
  return 1 + (space_.kind == ArchKind::cnn ? space_.cnn.max_depth : space_.mlp.max_depth);
}

Config SpaceSampler::finish(Config c) const {
  if (c.is_cnn()) {
    const Downsample fill = c.cnn().downsampling.empty() ? Downsample::maxpool : c.cnn().downsampling.front();
    sync_downsampling(c.cnn(), fill);
  }
  return finalize_ ? finalize_(std::move(c)) : c;
}

Config SpaceSampler::from_unit(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != dimension()) throw std::invalid_argument("unit point has the wrong dimension");
  Config c = base_;
  if (space_.stage == Stage::training) {
    const auto& t = space_.training;
    c.training.eta = std::pow(10.0, t.min_log_eta + u[0] * (t.max_log_eta - t.min_log_eta));
    c.training.lambda = lambda_from_exponent(t.min_log_lambda + u[1] * (t.max_log_lambda - t.min_log_lambda), t);
    c.training.batch_size = round_between(t.min_batch, t.max_batch, u[2]);
    return finish(std::move(c));
  }
  if (space_.kind == ArchKind::cnn) {
    const auto& b = space_.cnn;
    auto& arch = c.cnn();
    const int depth = round_between(b.min_depth, b.max_depth, u[0]);
    arch.channels.clear();
    arch.channels.push_back(round_between(b.min_first_channels, b.max_first_channels, u[1]));
    for (int layer = 2; layer <= depth; ++layer) {
      const int prev = arch.channels.back();
      arch.channels.push_back(round_between(prev, next_channel_cap(prev, b), u[layer]));
    }
  } else {
    const auto& b = space_.mlp;
    auto& arch = c.mlp();
    const int depth = round_between(b.min_depth, b.max_depth, u[0]);
    arch.hidden_nodes.clear();
    for (int layer = 1; layer <= depth; ++layer) arch.hidden_nodes.push_back(round_between(b.min_nodes, b.max_nodes, u[layer]));
  }
  return finish(std::move(c));
}

std::vector<Config> SpaceSampler::sobol(int n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("Sobol sample size must be at least 1");
  SobolSequence seq(dimension(), seed);
  std::vector<Config> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto point = seq.next();
    out.push_back(from_unit(point));
  }
  return out;
}

Config SpaceSampler::uniform(Rng& rng) const {
  Config c = base_;
  if (space_.stage == Stage::training) {
    const auto& t = space_.training;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    c.training.eta = std::pow(10.0, t.min_log_eta + unit(rng) * (t.max_log_eta - t.min_log_eta));
    c.training.lambda = lambda_from_exponent(t.min_log_lambda + unit(rng) * (t.max_log_lambda - t.min_log_lambda), t);
    c.training.batch_size = uniform_int(rng, t.min_batch, t.max_batch);
    return finish(std::move(c));
  }
  if (space_.kind == ArchKind::cnn) {
    const auto& b = space_.cnn;
    auto& arch = c.cnn();
    const int depth = uniform_int(rng, b.min_depth, b.max_depth);
    arch.channels.clear();
    arch.channels.push_back(uniform_int(rng, b.min_first_channels, b.max_first_channels));
    for (int layer = 2; layer <= depth; ++layer) {
      const int prev = arch.channels.back();
      arch.channels.push_back(uniform_int(rng, prev, next_channel_cap(prev, b)));
    }
  } else {
    const auto& b = space_.mlp;
    auto& arch = c.mlp();
    const int depth = uniform_int(rng, b.min_depth, b.max_depth);
    arch.hidden_nodes.clear();
    for (int layer = 1; layer <= depth; ++layer) arch.hidden_nodes.push_back(uniform_int(rng, b.min_nodes, b.max_nodes));
  }
  return finish(std::move(c));
}

}  // namespace cxs
