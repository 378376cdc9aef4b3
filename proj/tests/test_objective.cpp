// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "cxsearch/evaluator.hpp"
#include "cxsearch/objective.hpp"
#include "cxsearch/synthetic.hpp"

using namespace cxs;

namespace {

EvalResult result(double acc, double t_tr, std::int64_t n_params) {
  EvalResult r;
  r.best_val_acc = acc;
  r.t_tr_sec = t_tr;
  r.n_params = n_params;
  r.epochs_run = 10;
  return r;
}

// Always fails, for calibration error paths.
class BrokenEvaluator final : public Evaluator {
 public:
  BrokenEvaluator() : Evaluator(EvaluatorContract{"broken", {true, true, false, true}, default_synthetic_dataset(ArchKind::mlp)}) {}

 protected:
  EvalResult evaluate(const Config&, std::uint64_t) override { return EvalResult::failure("always broken"); }
};

}  // namespace

TEST_CASE("objective arithmetic") {
  CHECK(score(result(0.9374, 3.0, 100), {0.0, ComplexityMetric::t_tr, 1.0}) == doctest::Approx(0.0626).epsilon(1e-12));
  CHECK(score(result(0.9, 10.0, 100), {0.1, ComplexityMetric::t_tr, 100.0}) == doctest::Approx(0.11).epsilon(1e-12));
  const Score s = score_result(result(0.8, 7.0, 5000), {0.0, ComplexityMetric::n_params, 1e4});
  CHECK(s.f == s.f_p);
  CHECK(s.f_c == doctest::Approx(0.5));
  CHECK(s.metric_value == 5000.0);

  const Score failed = score_result(EvalResult::failure("boom"), {1.0, ComplexityMetric::t_tr, 1.0});
  CHECK(failed.failed);
  CHECK(std::isinf(failed.f));
}

TEST_CASE("preset weight decay profiles") {
  CHECK(preset_lambda(500'000, LambdaProfile::cnn) == 0.0);
  CHECK(preset_lambda(2'000'000, LambdaProfile::cnn) == 2e6 / 1e11);
  CHECK(preset_lambda(999'999, LambdaProfile::cnn) == 0.0);
  CHECK(preset_lambda(10'000, LambdaProfile::mlp_small) == 1e4 / 1e9);
  CHECK(preset_lambda(9'999, LambdaProfile::mlp_small) == 0.0);
  CHECK(preset_lambda(100'000, LambdaProfile::mlp_large) == 1e5 / 1e10);
  CHECK(preset_lambda(99'999, LambdaProfile::mlp_large) == 0.0);
}

TEST_CASE("presets for a sampled architecture") {
  const DatasetDescriptor img = default_synthetic_dataset(ArchKind::cnn);
  CnnArch a;
  a.channels = {32, 64, 100, 150, 200, 260, 300, 400, 500};
  Config c = apply_presets(Config{a, {}}, default_presets(ArchKind::cnn), img);
  CHECK(c.cnn().downsampling == std::vector<Downsample>(3, Downsample::maxpool));
  CHECK(c.cnn().bn_fraction.quarters == 4);
  CHECK(c.cnn().dropout_fraction.quarters == 4);
  CHECK(c.cnn().input_drop_prob == 0.0);
  CHECK(c.cnn().hidden_drop_prob == 0.3);
  CHECK(c.cnn().shortcuts == ShortcutPolicy::every_other);
  CHECK(c.training.eta == 1e-3);
  CHECK(c.training.batch_size == 256);
  CHECK(c.training.lambda == preset_lambda(count_params(c, img), LambdaProfile::cnn));

  a.channels.resize(8);
  CHECK(apply_presets(Config{a, {}}, default_presets(ArchKind::cnn), img).cnn().shortcuts == ShortcutPolicy::none);
}

TEST_CASE("c0 calibration") {
  const auto dataset = default_synthetic_dataset(ArchKind::mlp);
  SyntheticEvaluator ev({}, dataset);
  const SearchSpace space = core_space(ArchKind::mlp);
  const Presets presets = default_presets(ArchKind::mlp);
  const Config ref = maximal_config(space, presets, dataset);
  CHECK(ref.mlp().hidden_nodes == std::vector<int>{400, 400});

  CHECK(calibrate_c0(space, ev, ComplexityMetric::n_params, presets, 0) == count_params(ref, dataset));
  CHECK(calibrate_c0(space, ev, ComplexityMetric::t_tr, presets, 0) == synthetic_t_tr(ref, dataset, ev.settings()));

  BrokenEvaluator broken;
  CHECK_THROWS_AS(calibrate_c0(space, broken, ComplexityMetric::t_tr, presets, 0), CalibrationError);
}

TEST_CASE("maximal CNN doubles up to the cap") {
  const auto dataset = default_synthetic_dataset(ArchKind::cnn);
  const Config ref = maximal_config(core_space(ArchKind::cnn), default_presets(ArchKind::cnn), dataset);
  const auto& ch = ref.cnn().channels;
  REQUIRE(ch.size() == 16u);
  CHECK(ch[0] == 64);
  CHECK(ch[1] == 128);
  CHECK(ch[3] == 512);
  CHECK(ch[15] == 512);
}
