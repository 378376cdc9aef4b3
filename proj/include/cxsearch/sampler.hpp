// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "cxsearch/config.hpp"
#include "cxsearch/search_space.hpp"

namespace cxs {

using Rng = std::mt19937_64;

/// Draws configs from one stage's space. Stage 1 replaces the architecture of
/// `base`, Stage 3 replaces its training hyperparameters; everything else is
/// copied from `base`. `finalize` runs on every produced config (the pipeline
/// uses it to apply presets that depend on the architecture).
///
/// Unit-cube coordinates map as follows. Variable-depth architectures use
/// coordinate 0 for the depth and coordinate i for layer i; a CNN layer's
/// coordinate picks its channel count inside [c_{i-1}, min(2 c_{i-1}, cap)].
/// Stage 3 uses (log10 eta, log10 lambda, batch size). Values are mapped
/// linearly on their scale and rounded to the nearest legal value.
class SpaceSampler {
 public:
  using Finalizer = std::function<Config(Config)>;

  SpaceSampler(SearchSpace space, Config base, Finalizer finalize = {});

  const SearchSpace& space() const { return space_; }
  const Config& base() const { return base_; }
  int dimension() const;

  /// The first n points of the (optionally digitally shifted) Sobol sequence;
  /// seed 0 gives the unshifted sequence.
  std::vector<Config> sobol(int n, std::uint64_t seed) const;
  Config uniform(Rng& rng) const;
  Config from_unit(std::span<const double> u) const;

 private:
  Config finish(Config c) const;

  SearchSpace space_;
  Config base_;
  Finalizer finalize_;
};

/// Resizes the downsampling list to the channels' downsample points, keeping
/// existing choices and filling new points with `fill`.
void sync_downsampling(CnnArch& arch, Downsample fill);

}  // namespace cxs
