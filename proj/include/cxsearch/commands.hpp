// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command implementations behind the CLI verbs. Each returns a process exit
// code: 0 success, 1 usage or manifest error, 2 evaluator failure, 3 internal.
//
// Run directory layout (one per w_c value):
//   manifest.json   expanded manifest of this sub-run
//   trace.jsonl     every evaluation and selection, in order
//   stage1.cfg .. stage3.cfg, final.cfg   branch-0 incumbents (text encoding)
//   summary.json    derived from trace.jsonl alone
//   run_info.json   wall-clock timings (not deterministic)

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cxsearch/manifest.hpp"

namespace cxs {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitEvaluator = 2, kExitInternal = 3 };

/// Environment variable naming the default output root ("runs" if unset).
inline constexpr const char* kOutputRootEnv = "CXSEARCH_OUTPUT_ROOT";

struct CliOptions {
  std::string manifest;
  std::optional<std::vector<double>> w_c;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> modes;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> out;
  std::optional<std::string> evaluator;
  std::optional<int> greedy_width;
  /// transfer: source run directory; ensemble: run directory.
  std::string source;
  /// export: run directories (sweep roots are expanded).
  std::vector<std::string> runs;
  /// ensemble size.
  int n = 1;
};

std::unique_ptr<Evaluator> make_evaluator(const EvaluatorSpec& spec, ArchKind kind, int epochs);

std::filesystem::path default_output_root();

/// Applies --wc, --seed, --evaluator and --greedy-width.
RunManifest apply_overrides(RunManifest manifest, const CliOptions& options);

/// c0 for the manifest's Stage-1 space, evaluator and metric, read from or
/// stored in `<cache_root>/c0_cache.json`.
double resolve_c0(const RunManifest& manifest, Evaluator& evaluator, const std::filesystem::path& cache_root);

struct SearchArtifacts {
  std::filesystem::path dir;
  FullRun run;
  Json summary;
};

/// One complete search for a single w_c, written to `dir`.
SearchArtifacts run_search(const RunManifest& manifest, double w_c, double c0, Evaluator& evaluator,
                           const std::filesystem::path& dir);

/// Directory of the sub-run for `w_c` under a search root.
std::filesystem::path subrun_dir(const std::filesystem::path& root, double w_c);

int cmd_search(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_compare(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_transfer(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_ensemble(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_export(const CliOptions& options, std::ostream& out, std::ostream& err);

/// Trade-off table with columns w_c,acc,t_tr_sec,n_params,search_cost_sec,
/// one row per run directory, sorted by w_c.
std::string export_tradeoff(const std::vector<std::filesystem::path>& run_dirs);

/// Stage-3 evaluations of branch 0 reconstructed from trace records.
std::vector<BoEvaluation> stage3_from_trace(const std::vector<Json>& records);

/// Parses "0,0.01,0.1" style lists.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace cxs
