// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "cxsearch/encoding.hpp"
#include "cxsearch/pipeline.hpp"
#include "cxsearch/synthetic.hpp"
#include "support.hpp"

using namespace cxs;
using namespace cxs::testing;

namespace {

// Counts calls and can fail selected ones.
class CountingEvaluator final : public Evaluator {
 public:
  explicit CountingEvaluator(ArchKind kind, std::function<bool(const Config&, int)> fail = {})
      : Evaluator(EvaluatorContract{"counting", {true, true, false, true}, default_synthetic_dataset(kind)}),
        inner_({SyntheticFamily::separable, 0.0, 0}, default_synthetic_dataset(kind)),
        fail_(std::move(fail)) {}
  int calls = 0;

 protected:
  EvalResult evaluate(const Config& c, std::uint64_t seed) override {
    const int k = calls++;
    if (fail_ && fail_(c, k)) return EvalResult::failure("scripted failure");
    return inner_.run(c, seed);
  }

 private:
  SyntheticEvaluator inner_;
  std::function<bool(const Config&, int)> fail_;
};

StagePlan small_plan(ArchKind kind, BoMode mode = BoMode::balanced) {
  StagePlan p = StagePlan::defaults(kind);
  p.stage1 = BoSettings::preset(mode);
  p.stage3 = BoSettings::preset(mode);
  p.stage1.n3 = p.stage3.n3 = 200;
  return p;
}

Config cnn_with(std::vector<int> channels) {
  CnnArch a;
  a.channels = std::move(channels);
  sync_downsampling(a, Downsample::maxpool);
  return Config{a, {}};
}

int count_type(const TraceLog& t, const std::string& type, int stage = -1) {
  int n = 0;
  for (const auto& r : t.records())
    if (r["type"] == type && (stage < 0 || r["stage"] == stage)) ++n;
  return n;
}

}  // namespace

TEST_CASE("stage-2 grid sizes") {
  const Stage2Grids cnn = Stage2Grids::defaults(ArchKind::cnn);
  const Config three = cnn_with({60, 70, 130, 260});
  CHECK(substage_grid(SubStage::downsampling, three, cnn).size() == 8u);
  CHECK(substage_grid(SubStage::downsampling, cnn_with({16, 16, 16, 16}), cnn).empty());
  CHECK(substage_grid(SubStage::batch_norm, three, cnn).size() == 4u);
  CHECK(substage_grid(SubStage::dropout, three, cnn).size() == 4u * 2u * 3u);
  CHECK(substage_grid(SubStage::shortcuts, three, cnn).size() == 3u);

  StagePlan plan = StagePlan::defaults(ArchKind::cnn);
  CHECK(stage2_evaluations(plan, three) == 8 + 4 + 24 + 3);
  StagePlan mplan = StagePlan::defaults(ArchKind::mlp);
  CHECK(stage2_evaluations(mplan, Config{MlpArch{{100}, 0.2}, {}}) == 5);

  // Combo bit i selects maxpool at downsample point i.
  const auto ds = substage_grid(SubStage::downsampling, three, cnn);
  CHECK(ds[0].cnn().downsampling == std::vector<Downsample>(3, Downsample::stride));
  CHECK(ds[1].cnn().downsampling == std::vector<Downsample>{Downsample::maxpool, Downsample::stride, Downsample::stride});
  CHECK(ds[7].cnn().downsampling == std::vector<Downsample>(3, Downsample::maxpool));

  Stage2Grids with_inc = Stage2Grids::defaults(ArchKind::mlp);
  with_inc.include_incumbent = true;
  CHECK(substage_grid(SubStage::drop_prob, Config{MlpArch{{100}, 0.2}, {}}, with_inc).size() == 6u);
}

TEST_CASE("sub-stage grids change only their own axis") {
  const Stage2Grids g = Stage2Grids::defaults(ArchKind::cnn);
  Config inc = apply_presets(cnn_with({32, 70, 130, 260, 300}), default_presets(ArchKind::cnn),
                             default_synthetic_dataset(ArchKind::cnn));
  for (auto s : g.order) {
    for (const Config& c : substage_grid(s, inc, g)) {
      Config back = c;
      auto& a = back.cnn();
      const auto& o = inc.cnn();
      switch (s) {
        case SubStage::downsampling: a.downsampling = o.downsampling; break;
        case SubStage::batch_norm: a.bn_fraction = o.bn_fraction; break;
        case SubStage::dropout:
          a.dropout_fraction = o.dropout_fraction;
          a.input_drop_prob = o.input_drop_prob;
          a.hidden_drop_prob = o.hidden_drop_prob;
          break;
        case SubStage::shortcuts: a.shortcuts = o.shortcuts; break;
        case SubStage::drop_prob: break;
      }
      CHECK(back == inc);
    }
  }
}

TEST_CASE("full runs consume exactly the planned budget") {
  for (ArchKind kind : {ArchKind::mlp, ArchKind::cnn}) {
    for (BoMode mode : {BoMode::random, BoMode::grid, BoMode::balanced, BoMode::extreme}) {
      const StagePlan plan = small_plan(kind, mode);
      CountingEvaluator ev(kind);
      TraceLog trace;
      RunContext ctx{plan, {0.1, ComplexityMetric::t_tr, 1.0}, ev, trace, 3};
      const FullRun run = run_full(ctx, 1);
      CHECK(run.stage1.evaluations.size() == 30u);
      CHECK(run.branches.at(0).stage3.evaluations.size() == 30u);
      const int s2 = stage2_evaluations(plan, run.stage1.incumbent);
      CHECK(static_cast<int>(run.branches[0].stage2.evaluations.size()) == s2);
      if (kind == ArchKind::mlp) CHECK(s2 == 5);
      CHECK(ev.calls == 60 + s2);
      CHECK(ev.calls == planned_evaluations(plan, {run.stage1.incumbent}, 1));
      CHECK(count_type(trace, "eval") == ev.calls);
      CHECK(run.finals.size() == 1u);
    }
  }
}

TEST_CASE("stage 1 evaluates presets") {
  const StagePlan plan = small_plan(ArchKind::mlp);
  CountingEvaluator ev(ArchKind::mlp);
  TraceLog trace;
  RunContext ctx{plan, {}, ev, trace, 1};
  run_stage1(ctx);
  for (const auto& r : trace.records()) {
    if (r["type"] != "eval") continue;
    const Config c = decode(r["config"].get<std::string>());
    CHECK(c.training.eta == 1e-3);
    CHECK(c.training.batch_size == 256);
    CHECK(c.mlp().drop_prob == 0.2);
    CHECK(c.training.lambda == preset_lambda(count_params(c, ev.contract().dataset), LambdaProfile::mlp_small));
  }
}

TEST_CASE("width 3 yields nine distinct finals and branch 0 repeats the greedy chain") {
  const StagePlan plan = small_plan(ArchKind::mlp);
  SyntheticEvaluator ev1({SyntheticFamily::separable, 0.0, 0}, default_synthetic_dataset(ArchKind::mlp));
  SyntheticEvaluator ev3({SyntheticFamily::separable, 0.0, 0}, default_synthetic_dataset(ArchKind::mlp));
  TraceLog t1, t3;
  RunContext c1{plan, {0.1, ComplexityMetric::t_tr, 1.0}, ev1, t1, 9};
  RunContext c3{plan, {0.1, ComplexityMetric::t_tr, 1.0}, ev3, t3, 9};
  const FullRun w1 = run_full(c1, 1);
  const FullRun w3 = run_full(c3, 3);
  CHECK(w1.finals.size() == 1u);
  CHECK(w3.branches.size() == 3u);
  CHECK(w3.finals.size() == 9u);
  CHECK(w3.branches[0].stage3.incumbent == w1.branches[0].stage3.incumbent);
  std::set<std::string> s1;
  for (const auto& b : w3.branches) s1.insert(encode(b.stage2.incumbent));
  CHECK(s1.size() == 3u);
  for (std::size_t i = 1; i < w3.finals.size(); ++i) CHECK(w3.finals[i - 1].score.f <= w3.finals[i].score.f);
  CHECK(count_type(t3, "final") == 9);
}

TEST_CASE("a failing stage-2 sub-stage keeps the previous choice") {
  const StagePlan plan = small_plan(ArchKind::mlp);
  CountingEvaluator ev(ArchKind::mlp);
  TraceLog trace;
  RunContext ctx{plan, {}, ev, trace, 2};
  const StageOutcome s1 = run_stage1(ctx);
  CountingEvaluator failing(ArchKind::mlp, [](const Config&, int) { return true; });
  RunContext fctx{plan, {}, failing, trace, 2};
  const StageOutcome s2 = run_stage2(fctx, s1);
  CHECK(s2.incumbent == s1.incumbent);
  CHECK(s2.evaluations.size() == 5u);
  CHECK_THROWS_AS(run_stage1(fctx), SearchFailure);
}

TEST_CASE("failed stage-1 evaluations are skipped") {
  const StagePlan plan = small_plan(ArchKind::mlp);
  CountingEvaluator ev(ArchKind::mlp, [](const Config&, int k) { return k % 3 == 0; });
  TraceLog trace;
  RunContext ctx{plan, {}, ev, trace, 2};
  const StageOutcome s1 = run_stage1(ctx);
  CHECK(s1.evaluations.size() == 30u);
  CHECK(std::isfinite(s1.score.f));
  int failed = 0;
  for (const auto& r : trace.records())
    if (r["type"] == "eval" && r["status"] == "failed") {
      ++failed;
      CHECK(r["f"].is_null());
    }
  CHECK(failed == 10);
}

TEST_CASE("search transfer keeps the architecture and reruns stage 3") {
  const StagePlan plan = small_plan(ArchKind::mlp);
  SyntheticEvaluator a({SyntheticFamily::separable, 0.01, 1}, default_synthetic_dataset(ArchKind::mlp));
  SyntheticEvaluator b({SyntheticFamily::interacting, 0.02, 2}, default_synthetic_dataset(ArchKind::mlp));
  TraceLog ta, tb;
  RunContext ca{plan, {}, a, ta, 5};
  const StageOutcome s1 = run_stage1(ca);
  const StageOutcome s2 = run_stage2(ca, s1);
  const StageOutcome s3 = run_stage3(ca, s2.incumbent);
  RunContext cb{plan, {}, b, tb, 5};
  const StageOutcome moved = search_transfer(cb, s2.incumbent);
  CHECK(moved.evaluations.size() == 30u);
  CHECK(moved.incumbent.arch == s2.incumbent.arch);
  MESSAGE("source HPs " << encode(s3.incumbent) << " transfer HPs " << encode(moved.incumbent));
}

TEST_CASE("transfer to an incompatible dataset fails before evaluating") {
  StagePlan plan = small_plan(ArchKind::cnn);
  const Config arch = apply_presets(cnn_with({60, 70, 130, 260}), plan.presets, default_synthetic_dataset(ArchKind::cnn));
  SyntheticEvaluator tiny({}, DatasetDescriptor{"tiny", 0, 1, 4, 4, 10, 100});
  TraceLog trace;
  RunContext ctx{plan, {}, tiny, trace, 0};
  CHECK_THROWS_AS(search_transfer(ctx, arch), IncompatibleArchitecture);
  CHECK(trace.records().empty());
}

TEST_CASE("ensemble selection") {
  const StagePlan plan = small_plan(ArchKind::mlp);
  SyntheticEvaluator ev({SyntheticFamily::separable, 0.0, 0}, default_synthetic_dataset(ArchKind::mlp));
  TraceLog trace;
  RunContext ctx{plan, {}, ev, trace, 4};
  const StageOutcome s1 = run_stage1(ctx);
  const StageOutcome s3 = run_stage3(ctx, s1.incumbent);
  const auto& ds = ev.contract().dataset;
  const Capabilities caps = ev.contract().capabilities;

  const EnsembleSelection one = ensemble_select(s3.evaluations, 1, 30, ds, caps);
  CHECK(one.members.front() == s3.incumbent);
  const EnsembleSelection five = ensemble_select(s3.evaluations, 5, 30, ds, caps);
  CHECK(five.members.size() == 5u);
  CHECK(five.effective_params == 5 * count_params(s3.incumbent, ds));
  CHECK(five.vote["procedure"] == "majority_vote");
  CHECK(five.vote["tie_break"] == "highest_mean_softmax");
  CHECK(five.vote["supported"] == false);
  for (std::size_t i = 1; i < five.scores.size(); ++i) CHECK(five.scores[i - 1].f <= five.scores[i].f);
  CHECK_THROWS_AS(ensemble_select(s3.evaluations, 31, 30, ds, caps), std::invalid_argument);
  CHECK_THROWS_AS(ensemble_select(s3.evaluations, 0, 30, ds, caps), std::invalid_argument);
}

TEST_CASE("stage seeds") {
  CHECK(stage_seed(7, 1, 0) == stage_seed(7, 1, 0));
  CHECK(stage_seed(7, 1, 0) != stage_seed(7, 3, 0));
  CHECK(stage_seed(7, 3, 0) != stage_seed(7, 3, 1));
}

TEST_CASE("plan validation") {
  StagePlan plan = StagePlan::defaults(ArchKind::mlp);
  CHECK(validate(plan).empty());
  plan.stage2.order = {SubStage::shortcuts};
  CHECK_FALSE(validate(plan).empty());
  plan = StagePlan::defaults(ArchKind::cnn);
  plan.stage2.order.push_back(SubStage::batch_norm);
  CHECK_FALSE(validate(plan).empty());
}

TEST_CASE("greedy chain integrity and summary arithmetic from the trace") {
  const StagePlan plan = small_plan(ArchKind::mlp);
  SyntheticEvaluator ev({SyntheticFamily::separable, 0.01, 0}, default_synthetic_dataset(ArchKind::mlp));
  TraceLog trace;
  RunContext ctx{plan, {0.1, ComplexityMetric::t_tr, 1.0}, ev, trace, 6};
  const FullRun run = run_full(ctx, 1);

  std::map<int, Config> selected;
  double cost = 0.0;
  for (const auto& r : trace.records()) {
    if (r["type"] == "select") selected[r["stage"].get<int>()] = decode(r["config"].get<std::string>());
    if (r["type"] != "eval") continue;
    cost += r["t_tr_sec"].get<double>() * r["epochs_run"].get<int>();
    const Config c = decode(r["config"].get<std::string>());
    const int stage = r["stage"].get<int>();
    if (stage == 2) {
      Config back = c;
      back.mlp().drop_prob = selected.at(1).mlp().drop_prob;
      CHECK(back == selected.at(1));
    } else if (stage == 3) {
      CHECK(c.arch == selected.at(2).arch);
    }
  }
  CHECK(selected.at(1) == run.stage1.incumbent);
  CHECK(selected.at(3) == run.finals.front().config);

  const Json summary = build_summary(trace.records());
  CHECK(summary["search_cost_sec"].get<double>() == doctest::Approx(cost).epsilon(1e-12));
  CHECK(summary["evaluations"]["total"] == 65);
  CHECK(summary["final"]["f"].get<double>() == run.finals.front().score.f);
}
