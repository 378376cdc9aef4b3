// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cxsearch/config.hpp"
#include "cxsearch/kernel.hpp"
#include "cxsearch/objective.hpp"
#include "cxsearch/sampler.hpp"

namespace cxs {

enum class BoMode { random, grid, balanced, extreme, custom };
enum class PriorSampling { sobol, uniform };

/// n1 prior points, then n2 optimization steps that each score n3 fresh
/// uniform candidates by expected improvement and evaluate the best one.
struct BoSettings {
  BoMode mode = BoMode::balanced;
  PriorSampling prior = PriorSampling::sobol;
  int n1 = 15;
  int n2 = 15;
  int n3 = 1000;
  double xi = 1e-4;
  /// Observation noise variance added to the covariance diagonal.
  double noise = 1e-4;
  /// Keep every scored candidate in the trace.
  bool record_candidates = false;

  /// random: 30 uniform points; grid: 30 Sobol points; balanced: 15 Sobol +
  /// 15 steps; extreme: 1 Sobol + 29 steps. Steps score 1000 candidates.
  static BoSettings preset(BoMode mode);
  int budget() const { return n1 + n2; }
  bool operator==(const BoSettings&) const = default;
};

/// Problems with the settings; empty when usable.
std::vector<std::string> validate(const BoSettings& settings);

struct BoEvaluation {
  int index = 0;
  /// -1 for prior points, otherwise the optimization step.
  int step = -1;
  Config config;
  Score score;
  /// Seconds since the search started; not part of the deterministic output.
  double timestamp = 0.0;
};

struct BoCandidate {
  int step = 0;
  int index = 0;
  Config config;
  double mean = 0.0;
  double stddev = 0.0;
  double ei = 0.0;
};

struct BoTrace {
  std::vector<BoEvaluation> evaluations;
  std::vector<BoCandidate> candidates;
};

struct BoResult {
  Config best;
  Score best_score;
  BoTrace trace;
};

using ObjectiveFn = std::function<Score(const Config&)>;

/// Minimizes `objective` over the sampler's space. Calls `objective` exactly
/// n1 + n2 times; failed evaluations (f = +inf) stay in the trace but are not
/// conditioned on. EI argmax ties go to the lowest candidate index. The
/// incumbent is the first evaluation with the lowest f.
BoResult bo_minimize(const SpaceSampler& sampler, const KernelSpec& spec, const ObjectiveFn& objective,
                     const BoSettings& settings, std::uint64_t seed);

std::string_view to_string(BoMode mode);
std::string_view to_string(PriorSampling prior);
BoMode parse_bo_mode(std::string_view text);
PriorSampling parse_prior_sampling(std::string_view text);

}  // namespace cxs
