// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cxsearch/commands.hpp"
#include "cxsearch/log.hpp"

namespace {

void add_common(CLI::App* cmd, cxs::CliOptions& o, std::string& wc, std::string& seed) {
  cmd->add_option("--manifest", o.manifest, "Run manifest (JSON)")->required();
  cmd->add_option("--wc", wc, "Comma-separated complexity weights, e.g. 0,0.01,0.1,1,10");
  cmd->add_option("--seed", seed, "Run seed");
  cmd->add_option("--evaluator", o.evaluator, "Evaluator override: synthetic, builtin-mlp or external");
  cmd->add_option("--out", o.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complexity-aware architecture and hyperparameter search"};
  app.require_subcommand(1);
  cxs::CliOptions o;
  std::string wc, seed, modes, seeds;
  int greedy_width = 0;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  auto* search = app.add_subcommand("search", "Three-stage search, one sub-run per w_c");
  add_common(search, o, wc, seed);
  search->add_option("--greedy-width", greedy_width, "Carry the w best configs through each stage (w*w finals)");

  auto* compare = app.add_subcommand("compare", "Random / grid / balanced / extreme at matched budgets");
  add_common(compare, o, wc, seed);
  compare->add_option("--mode", modes, "Comma-separated modes (default: all four)");
  compare->add_option("--seeds", seeds, "Comma-separated seeds (default: the manifest seed)");

  auto* transfer = app.add_subcommand("transfer", "Rerun Stage 3 of a finished run on another evaluator");
  add_common(transfer, o, wc, seed);
  transfer->add_option("--source", o.source, "Source run directory (one w_c sub-run)")->required();

  auto* ensemble = app.add_subcommand("ensemble", "Pick the n best Stage-3 configs of a run");
  ensemble->add_option("--run", o.source, "Run directory (one w_c sub-run)")->required();
  ensemble->add_option("--n", o.n, "Ensemble size")->required();
  ensemble->add_option("--out", o.out, "Output file (default: <run>/ensemble.json)");

  auto* exporter = app.add_subcommand("export", "Trade-off table: w_c, acc, t_tr_sec, n_params, search_cost_sec");
  exporter->add_option("runs", o.runs, "Run directories or search roots")->required();
  exporter->add_option("--out", o.out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cxs::kExitOk : cxs::kExitUsage;
  }
  if (verbose) cxs::set_log_level(cxs::LogLevel::info);

  try {
    if (!wc.empty()) o.w_c = cxs::parse_number_list(wc);
    if (!seed.empty()) o.seed = std::stoull(seed);
    if (greedy_width != 0) o.greedy_width = greedy_width;
    for (const auto& s : CLI::detail::split(modes, ',')) if (!s.empty()) o.modes.push_back(s);
    for (const auto& s : CLI::detail::split(seeds, ',')) if (!s.empty()) o.seeds.push_back(std::stoull(s));
  } catch (const std::exception& e) {
    std::cerr << "error: bad option value: " << e.what() << "\n";
    return cxs::kExitUsage;
  }

  if (search->parsed()) return cxs::cmd_search(o, std::cout, std::cerr);
  if (compare->parsed()) return cxs::cmd_compare(o, std::cout, std::cerr);
  if (transfer->parsed()) return cxs::cmd_transfer(o, std::cout, std::cerr);
  if (ensemble->parsed()) return cxs::cmd_ensemble(o, std::cout, std::cerr);
  if (exporter->parsed()) return cxs::cmd_export(o, std::cout, std::cerr);
  return cxs::kExitUsage;
}
