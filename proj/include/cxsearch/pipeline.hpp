// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Three-stage greedy search: BO over the core architecture with training
// hyperparameters at presets, an ordered grid search over the advanced
// architecture choices, then BO over eta, lambda and batch size with the
// architecture frozen.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cxsearch/bayesopt.hpp"
#include "cxsearch/evaluator.hpp"
#include "cxsearch/objective.hpp"
#include "cxsearch/search_space.hpp"
#include "cxsearch/trace.hpp"

namespace cxs {

enum class SubStage { downsampling, batch_norm, dropout, shortcuts, drop_prob };

struct Stage2Grids {
  /// Sub-stages run in this order; each freezes its winner.
  std::vector<SubStage> order;
  std::vector<LayerFraction> bn_fractions{{0}, {1}, {2}, {3}};
  std::vector<LayerFraction> dropout_fractions{{0}, {1}, {2}, {3}};
  std::vector<double> input_drop_probs{0.1, 0.2};
  std::vector<double> hidden_drop_probs{0.15, 0.3, 0.45};
  std::vector<ShortcutPolicy> shortcuts{ShortcutPolicy::none, ShortcutPolicy::every_4th, ShortcutPolicy::every_other};
  std::vector<double> mlp_drop_probs{0.0, 0.1, 0.3, 0.4, 0.5};
  /// Append the incoming value of each axis to its grid when it is missing.
  bool include_incumbent = false;

  static Stage2Grids defaults(ArchKind kind);
  bool operator==(const Stage2Grids&) const = default;
};

struct StagePlan {
  ArchKind kind = ArchKind::mlp;
  SearchSpace stage1_space;
  BoSettings stage1;
  Stage2Grids stage2;
  SearchSpace stage3_space;
  BoSettings stage3;
  Presets presets;
  /// Training epochs per candidate evaluation.
  int epochs = 10;
  /// Epochs of the optional retrain on train + validation; 0 skips it.
  int final_epochs = 0;

  static StagePlan defaults(ArchKind kind);
  bool operator==(const StagePlan&) const = default;
};

std::vector<std::string> validate(const StagePlan& plan);

/// Grid points of one sub-stage around `incumbent`, in evaluation order.
/// Downsampling combos enumerate stride/maxpool per downsample point with
/// bit i of the combo index selecting maxpool at point i; a config without
/// downsample points has an empty grid.
std::vector<Config> substage_grid(SubStage substage, const Config& incumbent, const Stage2Grids& grids);

/// Stage-2 evaluation count for a given Stage-1 incumbent.
int stage2_evaluations(const StagePlan& plan, const Config& stage1_incumbent);
/// Evaluations of a width-w run, given the Stage-1 incumbents of its branches.
int planned_evaluations(const StagePlan& plan, const std::vector<Config>& stage1_incumbents, int width);

struct RunContext {
  const StagePlan& plan;
  ObjectiveSpec objective;
  Evaluator& evaluator;
  TraceLog& trace;
  std::uint64_t seed = 0;
};

struct StageOutcome {
  Config incumbent;
  Score score;
  /// Trace sequence number of the incumbent's evaluation; -1 if none.
  int incumbent_seq = -1;
  /// Every evaluation of the stage, in order, with their trace numbers.
  std::vector<BoEvaluation> evaluations;
  std::vector<int> eval_seqs;
};

/// Raised when a stage cannot produce an incumbent because every evaluation
/// failed.
class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

StageOutcome run_stage1(RunContext& ctx);
/// `incoming` is the Stage-1 outcome for this branch; it stays the incumbent
/// of any sub-stage whose grid points all fail.
StageOutcome run_stage2(RunContext& ctx, const StageOutcome& incoming, int branch = 0);
StageOutcome run_stage3(RunContext& ctx, const Config& incumbent, int branch = 0);

struct RankedConfig {
  Config config;
  Score score;
  int branch = 0;
  /// Position within its branch's Stage-3 ranking.
  int rank_in_branch = 0;
  int eval_seq = -1;
};

struct Branch {
  StageOutcome stage2;
  StageOutcome stage3;
  std::vector<RankedConfig> finals;
};

struct FullRun {
  StageOutcome stage1;
  std::vector<Branch> branches;
  /// All finals, best first.
  std::vector<RankedConfig> finals;
  std::optional<EvalResult> retrain;
};

/// Width 1 is the greedy chain. Width w carries the w best distinct Stage-1
/// configs through Stage 2 and Stage 3 and keeps each branch's w best
/// distinct Stage-3 configs (w * w finals). Branch 0 repeats the width-1 run.
FullRun run_full(RunContext& ctx, int greedy_width = 1);

/// Seeds of stage k (1..3) on branch b; branch 0 matches the width-1 chain.
std::uint64_t stage_seed(std::uint64_t run_seed, int stage, int branch);

/// Reruns Stage 3 on `architecture` against ctx.evaluator. Throws
/// IncompatibleArchitecture before any evaluation if the target cannot run it.
StageOutcome search_transfer(RunContext& ctx, const Config& architecture);

struct EnsembleSelection {
  std::vector<Config> members;
  std::vector<Score> scores;
  std::int64_t member_params = 0;
  std::int64_t effective_params = 0;
  /// Inference procedure: majority vote, ties to the class with the highest
  /// mean softmax; `supported` reflects the evaluator's capability.
  Json vote;
};

/// The n lowest-f Stage-3 evaluations (ties by evaluation order). Throws
/// std::invalid_argument for n < 1 or n > the Stage-3 budget.
EnsembleSelection ensemble_select(const std::vector<BoEvaluation>& stage3, int n, int budget,
                                  const DatasetDescriptor& dataset, const Capabilities& caps);

std::string_view to_string(SubStage substage);
SubStage parse_substage(std::string_view text);

}  // namespace cxs
