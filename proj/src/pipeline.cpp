// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cxsearch/encoding.hpp"
#include "cxsearch/hash.hpp"
#include "cxsearch/log.hpp"

namespace cxs {

Stage2Grids Stage2Grids::defaults(ArchKind kind) {
  Stage2Grids g;
  if (kind == ArchKind::cnn) g.order = {SubStage::downsampling, SubStage::batch_norm, SubStage::dropout, SubStage::shortcuts};
  else g.order = {SubStage::drop_prob};
  return g;
}

StagePlan StagePlan::defaults(ArchKind kind) {
  StagePlan p;
  p.kind = kind;
  p.stage1_space = core_space(kind);
  p.stage1 = BoSettings::preset(BoMode::balanced);
  p.stage2 = Stage2Grids::defaults(kind);
  p.stage3_space = training_space(kind);
  p.stage3 = BoSettings::preset(BoMode::balanced);
  p.presets = default_presets(kind);
  return p;
}

namespace {

bool is_cnn_substage(SubStage s) { return s != SubStage::drop_prob; }

bool valid_prob(double p) { return p >= 0.0 && p < 1.0; }

}  // namespace

std::vector<std::string> validate(const StagePlan& plan) {
  std::vector<std::string> errors;
  auto add_all = [&](const std::string& prefix, const std::vector<std::string>& found) {
    for (const auto& e : found) errors.push_back(prefix + e);
  };
  if (plan.stage1_space.stage != Stage::core) errors.push_back("stage1 space must be the core stage space");
  if (plan.stage3_space.stage != Stage::training) errors.push_back("stage3 space must be the training stage space");
  if (plan.stage1_space.kind != plan.kind || plan.stage3_space.kind != plan.kind) {
    errors.push_back("search spaces must match the problem kind");
  }
  add_all("stage1 space: ", validate(plan.stage1_space));
  add_all("stage3 space: ", validate(plan.stage3_space));
  add_all("stage1 BO: ", validate(plan.stage1));
  add_all("stage3 BO: ", validate(plan.stage3));
  if (plan.epochs < 1) errors.push_back("epochs must be at least 1");
  if (plan.final_epochs < 0) errors.push_back("final_epochs must be non-negative");
  std::set<SubStage> seen;
  for (auto s : plan.stage2.order) {
    if (!seen.insert(s).second) errors.push_back("sub-stage '" + std::string(to_string(s)) + "' listed twice");
    if (is_cnn_substage(s) != (plan.kind == ArchKind::cnn)) {
      errors.push_back("sub-stage '" + std::string(to_string(s)) + "' does not apply to " + std::string(to_string(plan.kind)));
    }
  }
  const auto& g = plan.stage2;
  auto nonempty = [&](SubStage s, bool ok) {
    if (seen.count(s) && !ok) errors.push_back("grid for sub-stage '" + std::string(to_string(s)) + "' is empty");
  };
  nonempty(SubStage::batch_norm, !g.bn_fractions.empty());
  nonempty(SubStage::dropout, !g.dropout_fractions.empty() && !g.input_drop_probs.empty() && !g.hidden_drop_probs.empty());
  nonempty(SubStage::shortcuts, !g.shortcuts.empty());
  nonempty(SubStage::drop_prob, !g.mlp_drop_probs.empty());
  for (auto f : g.bn_fractions)
    if (!f.valid()) errors.push_back("BN fraction out of range");
  for (auto f : g.dropout_fractions)
    if (!f.valid()) errors.push_back("dropout fraction out of range");
  for (const auto* list : {&g.input_drop_probs, &g.hidden_drop_probs, &g.mlp_drop_probs})
    for (double p : *list)
      if (!valid_prob(p)) errors.push_back("drop probability " + format_double(p) + " outside [0, 1)");
  if (plan.presets.batch_size < 1) errors.push_back("preset batch size must be positive");
  if (!(plan.presets.eta > 0.0)) errors.push_back("preset eta must be positive");
  if (!valid_prob(plan.presets.cnn_drop_prob) || !valid_prob(plan.presets.mlp_drop_prob)) {
    errors.push_back("preset drop probability outside [0, 1)");
  }
  return errors;
}

std::vector<Config> substage_grid(SubStage substage, const Config& incumbent, const Stage2Grids& grids) {
  std::vector<Config> out;
  auto with = [&](auto&& mutate) {
    Config c = incumbent;
    mutate(c);
    out.push_back(std::move(c));
  };
  switch (substage) {
    case SubStage::downsampling: {
      const auto n = incumbent.cnn().downsampling.size();
      if (n == 0) break;
      for (unsigned combo = 0; combo < (1u << n); ++combo) {
        with([&](Config& c) {
          for (std::size_t i = 0; i < n; ++i) c.cnn().downsampling[i] = (combo >> i) & 1u ? Downsample::maxpool : Downsample::stride;
        });
      }
      break;
    }
    case SubStage::batch_norm: {
      auto values = grids.bn_fractions;
      const auto cur = incumbent.cnn().bn_fraction;
      if (grids.include_incumbent && std::find(values.begin(), values.end(), cur) == values.end()) values.push_back(cur);
      for (auto v : values) with([&](Config& c) { c.cnn().bn_fraction = v; });
      break;
    }
    case SubStage::dropout: {
      const auto& a = incumbent.cnn();
      bool has_current = false;
      for (auto f : grids.dropout_fractions)
        for (double in : grids.input_drop_probs)
          for (double hid : grids.hidden_drop_probs) {
            has_current = has_current || (f == a.dropout_fraction && in == a.input_drop_prob && hid == a.hidden_drop_prob);
            with([&](Config& c) {
              c.cnn().dropout_fraction = f;
              c.cnn().input_drop_prob = in;
              c.cnn().hidden_drop_prob = hid;
            });
          }
      if (grids.include_incumbent && !has_current) out.push_back(incumbent);
      break;
    }
    case SubStage::shortcuts: {
      auto values = grids.shortcuts;
      const auto cur = incumbent.cnn().shortcuts;
      if (grids.include_incumbent && std::find(values.begin(), values.end(), cur) == values.end()) values.push_back(cur);
      for (auto v : values) with([&](Config& c) { c.cnn().shortcuts = v; });
      break;
    }
    case SubStage::drop_prob: {
      auto values = grids.mlp_drop_probs;
      const double cur = incumbent.mlp().drop_prob;
      if (grids.include_incumbent && std::find(values.begin(), values.end(), cur) == values.end()) values.push_back(cur);
      for (double v : values) with([&](Config& c) { c.mlp().drop_prob = v; });
      break;
    }
  }
  return out;
}

int stage2_evaluations(const StagePlan& plan, const Config& stage1_incumbent) {
  int n = 0;
  for (auto s : plan.stage2.order) n += static_cast<int>(substage_grid(s, stage1_incumbent, plan.stage2).size());
  return n;
}

int planned_evaluations(const StagePlan& plan, const std::vector<Config>& stage1_incumbents, int width) {
  int n = plan.stage1.budget();
  for (int b = 0; b < width && b < static_cast<int>(stage1_incumbents.size()); ++b) {
    n += stage2_evaluations(plan, stage1_incumbents[static_cast<std::size_t>(b)]) + plan.stage3.budget();
  }
  return n;
}

std::uint64_t stage_seed(std::uint64_t run_seed, int stage, int branch) {
  const std::uint64_t base = derive_seed(run_seed, static_cast<std::uint64_t>(stage));
  return branch == 0 ? base : derive_seed(base, static_cast<std::uint64_t>(branch));
}

namespace {

constexpr std::uint64_t kEvalStream = 0xe7a1;

struct Scored {
  Score score;
  int seq;
};

Scored evaluate_logged(RunContext& ctx, const Config& config, const TraceTag& tag) {
  const EvalResult r = ctx.evaluator.run(config, derive_seed(ctx.seed, kEvalStream));
  Score s = score_result(r, ctx.objective);
  if (s.failed) log(LogLevel::warning, "evaluation failed (" + r.failure_reason.substr(0, r.failure_reason.find('\n')) + ")");
  const int seq = ctx.trace.next_eval_seq();
  ctx.trace.append(eval_record(tag, config, s));
  return {std::move(s), seq};
}

void log_select(RunContext& ctx, int branch, int stage, std::string_view substage, const Config& config, int seq) {
  Json r{{"type", "select"}, {"branch", branch}, {"stage", stage}, {"substage", substage}, {"config", encode(config)}};
  r["eval"] = seq >= 0 ? Json(seq) : Json(nullptr);
  ctx.trace.append(std::move(r));
}

StageOutcome run_bo_stage(RunContext& ctx, const SpaceSampler& sampler, const BoSettings& settings, int stage,
                          int branch, std::string_view substage) {
  StageOutcome out;
  int calls = 0;
  ObjectiveFn objective = [&](const Config& c) {
    const int step = calls < settings.n1 ? -1 : calls - settings.n1;
    ++calls;
    auto [score, seq] = evaluate_logged(ctx, c, TraceTag{branch, stage, std::string(substage), step});
    out.eval_seqs.push_back(seq);
    return score;
  };
  BoResult bo = bo_minimize(sampler, KernelSpec::from_space(sampler.space()), objective, settings,
                            stage_seed(ctx.seed, stage, branch));
  for (const auto& c : bo.trace.candidates) {
    ctx.trace.append(Json{{"type", "candidate"}, {"branch", branch}, {"stage", stage}, {"step", c.step},
                          {"index", c.index}, {"config", encode(c.config)}, {"mean", c.mean},
                          {"stddev", c.stddev}, {"ei", c.ei}});
  }
  if (!std::isfinite(bo.best_score.f)) {
    throw SearchFailure("stage " + std::to_string(stage) + ": all " + std::to_string(settings.budget()) +
                        " evaluations failed");
  }
  out.incumbent = bo.best;
  out.score = bo.best_score;
  for (std::size_t i = 0; i < bo.trace.evaluations.size(); ++i) {
    if (bo.trace.evaluations[i].score.f == bo.best_score.f && bo.trace.evaluations[i].config == bo.best) {
      out.incumbent_seq = out.eval_seqs[i];
      break;
    }
  }
  out.evaluations = std::move(bo.trace.evaluations);
  log_select(ctx, branch, stage, substage, out.incumbent, out.incumbent_seq);
  return out;
}

/// Order used to pick winners: f, then the complexity metric, then position.
bool better(const Score& a, int ia, const Score& b, int ib) {
  if (a.f != b.f) return a.f < b.f;
  if (a.metric_value != b.metric_value) return a.metric_value < b.metric_value;
  return ia < ib;
}

/// Indices of the `count` best distinct configs among `evals` (finite f only).
std::vector<std::size_t> top_distinct(const std::vector<BoEvaluation>& evals, int count) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < evals.size(); ++i)
    if (std::isfinite(evals[i].score.f)) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return evals[a].score.f < evals[b].score.f; });
  std::vector<std::size_t> out;
  std::set<std::string> seen;
  for (auto i : idx) {
    if (static_cast<int>(out.size()) >= count) break;
    if (seen.insert(encode(evals[i].config)).second) out.push_back(i);
  }
  return out;
}

}  // namespace

StageOutcome run_stage1(RunContext& ctx) {
  const auto& plan = ctx.plan;
  Config base;
  if (plan.kind == ArchKind::cnn) base.arch = CnnArch{};
  else base.arch = MlpArch{};
  const DatasetDescriptor dataset = ctx.evaluator.contract().dataset;
  const Presets presets = plan.presets;
  SpaceSampler sampler(plan.stage1_space, base,
                       [dataset, presets](Config c) { return apply_presets(std::move(c), presets, dataset); });
  return run_bo_stage(ctx, sampler, plan.stage1, 1, 0, "core");
}

StageOutcome run_stage2(RunContext& ctx, const StageOutcome& incoming, int branch) {
  const auto& plan = ctx.plan;
  const DatasetDescriptor dataset = ctx.evaluator.contract().dataset;
  StageOutcome out;
  out.incumbent = incoming.incumbent;
  out.score = incoming.score;
  out.incumbent_seq = incoming.incumbent_seq;
  for (auto substage : plan.stage2.order) {
    auto grid = substage_grid(substage, out.incumbent, plan.stage2);
    if (grid.empty()) continue;
    int best = -1;
    Score best_score;
    int best_seq = -1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Config c = refresh_preset_lambda(std::move(grid[i]), plan.presets, dataset);
      auto [score, seq] = evaluate_logged(ctx, c, TraceTag{branch, 2, std::string(to_string(substage)), -1});
      out.evaluations.push_back({static_cast<int>(out.evaluations.size()), -1, c, score, 0.0});
      out.eval_seqs.push_back(seq);
      if (std::isfinite(score.f) && (best < 0 || better(score, static_cast<int>(i), best_score, best))) {
        best = static_cast<int>(i);
        best_score = score;
        best_seq = seq;
      }
      grid[i] = std::move(c);
    }
    if (best >= 0) {
      out.incumbent = grid[static_cast<std::size_t>(best)];
      out.score = best_score;
      out.incumbent_seq = best_seq;
    } else {
      log(LogLevel::warning, "every grid point of sub-stage " + std::string(to_string(substage)) +
                                 " failed; keeping the previous choice");
    }
    log_select(ctx, branch, 2, to_string(substage), out.incumbent, best >= 0 ? best_seq : -1);
  }
  return out;
}

StageOutcome run_stage3(RunContext& ctx, const Config& incumbent, int branch) {
  SpaceSampler sampler(ctx.plan.stage3_space, incumbent);
  return run_bo_stage(ctx, sampler, ctx.plan.stage3, 3, branch, "training");
}

FullRun run_full(RunContext& ctx, int greedy_width) {
  if (greedy_width < 1) throw std::invalid_argument("greedy width must be at least 1");
  FullRun run;
  run.stage1 = run_stage1(ctx);
  const auto picks = top_distinct(run.stage1.evaluations, greedy_width);
  for (std::size_t b = 0; b < picks.size(); ++b) {
    const auto i = picks[b];
    StageOutcome start;
    start.incumbent = run.stage1.evaluations[i].config;
    start.score = run.stage1.evaluations[i].score;
    start.incumbent_seq = run.stage1.eval_seqs[i];
    if (b > 0) log_select(ctx, static_cast<int>(b), 1, "core", start.incumbent, start.incumbent_seq);
    Branch br;
    br.stage2 = run_stage2(ctx, start, static_cast<int>(b));
    br.stage3 = run_stage3(ctx, br.stage2.incumbent, static_cast<int>(b));
    const auto best = top_distinct(br.stage3.evaluations, greedy_width);
    for (std::size_t r = 0; r < best.size(); ++r) {
      const auto& e = br.stage3.evaluations[best[r]];
      br.finals.push_back({e.config, e.score, static_cast<int>(b), static_cast<int>(r), br.stage3.eval_seqs[best[r]]});
    }
    run.finals.insert(run.finals.end(), br.finals.begin(), br.finals.end());
    run.branches.push_back(std::move(br));
  }
  std::stable_sort(run.finals.begin(), run.finals.end(),
                   [](const RankedConfig& a, const RankedConfig& b) { return a.score.f < b.score.f; });
  for (std::size_t r = 0; r < run.finals.size(); ++r) {
    const auto& f = run.finals[r];
    ctx.trace.append(Json{{"type", "final"}, {"rank", r}, {"branch", f.branch}, {"rank_in_branch", f.rank_in_branch},
                          {"config", encode(f.config)}, {"eval", f.eval_seq}});
  }
  if (ctx.plan.final_epochs > 0 && !run.finals.empty()) {
    const Config& best = run.finals.front().config;
    EvalResult r = ctx.evaluator.final_evaluate(best, ctx.plan.final_epochs, derive_seed(ctx.seed, kEvalStream));
    Json rec{{"type", "retrain"}, {"config", encode(best)}, {"epochs", ctx.plan.final_epochs},
             {"status", r.failed ? "failed" : "ok"}};
    if (r.failed) {
      rec["reason"] = r.failure_reason;
    } else {
      rec["test_acc"] = r.best_val_acc;
      rec["t_tr_sec"] = r.t_tr_sec;
      rec["n_params"] = r.n_params;
    }
    ctx.trace.append(std::move(rec));
    run.retrain = std::move(r);
  }
  return run;
}

StageOutcome search_transfer(RunContext& ctx, const Config& architecture) {
  check_compatible(architecture, ctx.evaluator.contract().dataset);
  return run_stage3(ctx, architecture, 0);
}

EnsembleSelection ensemble_select(const std::vector<BoEvaluation>& stage3, int n, int budget,
                                  const DatasetDescriptor& dataset, const Capabilities& caps) {
  if (n < 1) throw std::invalid_argument("ensemble size must be at least 1");
  if (n > budget) {
    throw std::invalid_argument("ensemble size " + std::to_string(n) + " exceeds the Stage-3 budget of " +
                                std::to_string(budget) + " evaluations");
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < stage3.size(); ++i)
    if (std::isfinite(stage3[i].score.f)) idx.push_back(i);
  if (static_cast<int>(idx.size()) < n) {
    throw std::invalid_argument("only " + std::to_string(idx.size()) + " successful Stage-3 evaluations for an ensemble of " +
                                std::to_string(n));
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return stage3[a].score.f < stage3[b].score.f; });
  EnsembleSelection sel;
  Json members = Json::array();
  for (int k = 0; k < n; ++k) {
    const auto& e = stage3[idx[static_cast<std::size_t>(k)]];
    sel.members.push_back(e.config);
    sel.scores.push_back(e.score);
    members.push_back(encode(e.config));
  }
  sel.member_params = count_params(sel.members.front(), dataset);
  sel.effective_params = static_cast<std::int64_t>(n) * sel.member_params;
  sel.vote = Json{{"procedure", "majority_vote"},
                  {"tie_break", "highest_mean_softmax"},
                  {"supported", caps.ensemble_vote},
                  {"members", members}};
  return sel;
}

std::string_view to_string(SubStage substage) {
  switch (substage) {
    case SubStage::downsampling: return "downsampling";
    case SubStage::batch_norm: return "batch_norm";
    case SubStage::dropout: return "dropout";
    case SubStage::shortcuts: return "shortcuts";
    case SubStage::drop_prob: return "drop_prob";
  }
  return "?";
}

SubStage parse_substage(std::string_view text) {
  for (auto s : {SubStage::downsampling, SubStage::batch_norm, SubStage::dropout, SubStage::shortcuts, SubStage::drop_prob}) {
    if (text == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown sub-stage '" + std::string(text) + "'");
}

}  // namespace cxs
