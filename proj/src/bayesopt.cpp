// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/bayesopt.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "cxsearch/gp.hpp"
#include "cxsearch/hash.hpp"

namespace cxs {

BoSettings BoSettings::preset(BoMode mode) {
  BoSettings s;
  s.mode = mode;
  switch (mode) {
    case BoMode::random:
      s.prior = PriorSampling::uniform;
      s.n1 = 30;
      s.n2 = 0;
      break;
    case BoMode::grid:
      s.n1 = 30;
      s.n2 = 0;
      break;
    case BoMode::balanced:
    case BoMode::custom:
      s.n1 = 15;
      s.n2 = 15;
      break;
    case BoMode::extreme:
      s.n1 = 1;
      s.n2 = 29;
      break;
  }
  return s;
}

std::vector<std::string> validate(const BoSettings& s) {
  std::vector<std::string> errors;
  if (s.n1 < 1) errors.push_back("n1 must be at least 1");
  if (s.n2 < 0) errors.push_back("n2 must be non-negative");
  if (s.n2 > 0 && s.n3 < 1) errors.push_back("n3 must be at least 1 when n2 > 0");
  if (!(s.xi >= 0.0)) errors.push_back("xi must be non-negative");
  if (!(s.noise >= 0.0)) errors.push_back("noise must be non-negative");
  return errors;
}

BoResult bo_minimize(const SpaceSampler& sampler, const KernelSpec& spec, const ObjectiveFn& objective,
                     const BoSettings& settings, std::uint64_t seed) {
  if (const auto errors = validate(settings); !errors.empty()) throw std::invalid_argument("BO settings: " + errors.front());
  const auto start = std::chrono::steady_clock::now();
  Rng rng(derive_seed(seed, 1));
  BoResult result;
  GpState state(spec, settings.noise);
  int best = -1;

  auto record = [&](const Config& config, int step) {
    BoEvaluation e;
    e.index = static_cast<int>(result.trace.evaluations.size());
    e.step = step;
    e.config = config;
    e.score = objective(config);
    e.timestamp = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (std::isfinite(e.score.f)) state.add(config, e.score.f);
    if (best < 0 || e.score.f < result.trace.evaluations[static_cast<std::size_t>(best)].score.f) best = e.index;
    result.trace.evaluations.push_back(std::move(e));
  };

  if (settings.prior == PriorSampling::sobol) {
    for (const auto& c : sampler.sobol(settings.n1, seed)) record(c, -1);
  } else {
    for (int i = 0; i < settings.n1; ++i) record(sampler.uniform(rng), -1);
  }

  for (int step = 0; step < settings.n2; ++step) {
    std::vector<Config> candidates;
    candidates.reserve(static_cast<std::size_t>(settings.n3));
    for (int i = 0; i < settings.n3; ++i) candidates.push_back(sampler.uniform(rng));
    std::size_t pick = 0;
    if (state.size() > 0) {
      const GaussianProcess gp = state.fit();
      const double f_star = state.best_value();
      double best_ei = -1.0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Posterior post = state.predict(gp, extract_features(candidates[i], spec));
        const double ei = expected_improvement(post.mean, post.stddev, f_star, settings.xi);
        if (ei > best_ei) {
          best_ei = ei;
          pick = i;
        }
        if (settings.record_candidates) {
          result.trace.candidates.push_back({step, static_cast<int>(i), candidates[i], post.mean, post.stddev, ei});
        }
      }
    }
    record(candidates[pick], step);
  }

  const auto& incumbent = result.trace.evaluations[static_cast<std::size_t>(best)];
  result.best = incumbent.config;
  result.best_score = incumbent.score;
  return result;
}

std::string_view to_string(BoMode mode) {
  switch (mode) {
    case BoMode::random: return "random";
    case BoMode::grid: return "grid";
    case BoMode::balanced: return "balanced";
    case BoMode::extreme: return "extreme";
    case BoMode::custom: return "custom";
  }
  return "?";
}

std::string_view to_string(PriorSampling prior) { return prior == PriorSampling::sobol ? "sobol" : "uniform"; }

BoMode parse_bo_mode(std::string_view text) {
  for (auto m : {BoMode::random, BoMode::grid, BoMode::balanced, BoMode::extreme, BoMode::custom}) {
    if (text == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown BO mode '" + std::string(text) + "' (expected random, grid, balanced or extreme)");
}

PriorSampling parse_prior_sampling(std::string_view text) {
  if (text == "sobol") return PriorSampling::sobol;
  if (text == "uniform") return PriorSampling::uniform;
  throw std::invalid_argument("unknown prior sampling '" + std::string(text) + "'");
}

}  // namespace cxs
