// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "cxsearch/encoding.hpp"
#include "cxsearch/external.hpp"
#include "cxsearch/hash.hpp"
#include "cxsearch/log.hpp"
#include "cxsearch/mlp_trainer.hpp"

namespace cxs {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return Json::parse(in);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json capabilities_json(const Capabilities& c) {
  return Json{{"cnn", c.cnn}, {"mlp", c.mlp}, {"ensemble_vote", c.ensemble_vote}, {"deterministic", c.deterministic}};
}

Capabilities capabilities_from(const Json& j) {
  return {j.value("cnn", false), j.value("mlp", false), j.value("ensemble_vote", false), j.value("deterministic", false)};
}

Json evaluator_json(const Evaluator& ev) {
  const auto& c = ev.contract();
  return Json{{"id", c.id}, {"capabilities", capabilities_json(c.capabilities)}, {"dataset", to_json(c.dataset)},
              {"epochs", c.epochs}};
}

/// Manifest of one sub-run as recorded in traces: single w_c and no output
/// directory, so reruns elsewhere produce identical records.
Json subrun_manifest(RunManifest m, double w_c) {
  m.w_c = {w_c};
  m.output_dir.clear();
  return serialize(m);
}

Json header_record(const RunManifest& m, double w_c, double c0, const Evaluator& ev) {
  return Json{{"type", "header"},
              {"name", m.name},
              {"kind", to_string(m.kind)},
              {"seed", m.seed},
              {"w_c", w_c},
              {"metric", to_string(m.metric)},
              {"c0", c0},
              {"greedy_width", m.greedy_width},
              {"evaluator", evaluator_json(ev)},
              {"manifest", subrun_manifest(m, w_c)}};
}

void write_summary(const fs::path& dir, const TraceLog& trace, Json& summary) {
  summary = build_summary(trace.records());
  write_text(dir / "summary.json", dump_json(summary));
}

void write_run_info(const fs::path& dir, std::chrono::steady_clock::time_point start) {
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(dir / "run_info.json", dump_json(Json{{"wall_clock_sec", wall}}));
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ManifestError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IncompatibleArchitecture& e) {
    err << "error: " << e.what() << "\n";
    return kExitEvaluator;
  } catch (const SearchFailure& e) {
    err << "evaluator failure: " << e.what() << "\n";
    return kExitEvaluator;
  } catch (const CalibrationError& e) {
    err << "evaluator failure: " << e.what() << "\n";
    return kExitEvaluator;
  } catch (const ProtocolError& e) {
    err << "evaluator failure: " << e.what() << "\n";
    return kExitEvaluator;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

RunManifest load_with_overrides(const CliOptions& options) {
  if (options.manifest.empty()) throw ManifestError("--manifest is required");
  return apply_overrides(load_manifest(options.manifest), options);
}

fs::path search_root(const RunManifest& m, const CliOptions& options, const std::string& suffix = "") {
  if (options.out) return *options.out;
  if (!m.output_dir.empty()) return fs::path(m.output_dir) / suffix;
  return default_output_root() / (m.name + suffix);
}

double summary_number(const Json& final, const char* key) {
  const auto it = final.find(key);
  return it != final.end() && it->is_number() ? it->get<double>() : std::nan("");
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw std::invalid_argument("empty entry in list '" + text + "'");
    out.push_back(parse_double(item));
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::unique_ptr<Evaluator> make_evaluator(const EvaluatorSpec& spec, ArchKind kind, int epochs) {
  switch (spec.type) {
    case EvaluatorType::synthetic:
      return std::make_unique<SyntheticEvaluator>(spec.synthetic, spec.dataset.value_or(default_synthetic_dataset(kind)),
                                                  epochs);
    case EvaluatorType::builtin_mlp: {
      if (kind != ArchKind::mlp) throw ManifestError("the builtin-mlp evaluator supports MLP problems only");
      const auto& d = spec.data;
      Dataset data;
      if (d.source == "digits") data = load_digits();
      else if (d.source == "blobs") data = make_blobs(d.blob_per_class, d.blob_classes, d.blob_features, d.blob_separation, d.blob_seed);
      else data = load_csv(d.source, static_cast<float>(d.scale));
      return std::make_unique<MlpTrainer>(split(data, d.train_fraction, d.val_fraction, d.split_seed), epochs);
    }
    case EvaluatorType::external: {
      ExternalSettings s;
      s.command = spec.command;
      s.dataset = spec.dataset.value_or(DatasetDescriptor{});
      s.epochs = epochs;
      s.timeout = std::chrono::milliseconds(static_cast<long long>(spec.timeout_sec * 1000.0));
      return std::make_unique<ExternalEvaluator>(std::move(s));
    }
  }
  throw std::logic_error("unknown evaluator type");
}

fs::path default_output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  return env && *env ? fs::path(env) : fs::path("runs");
}

RunManifest apply_overrides(RunManifest m, const CliOptions& o) {
  if (o.w_c) {
    for (double w : *o.w_c)
      if (!(w >= 0.0)) throw ManifestError("--wc values must be non-negative");
    m.w_c = *o.w_c;
  }
  if (o.seed) m.seed = *o.seed;
  if (o.evaluator) {
    try {
      m.evaluator.type = parse_evaluator_type(*o.evaluator);
    } catch (const std::invalid_argument& e) {
      throw ManifestError(std::string("--evaluator: ") + e.what());
    }
  }
  if (o.greedy_width) {
    if (*o.greedy_width < 1) throw ManifestError("--greedy-width must be at least 1");
    m.greedy_width = *o.greedy_width;
  }
  return m;
}

double resolve_c0(const RunManifest& m, Evaluator& evaluator, const fs::path& cache_root) {
  const Json full = serialize(m);
  const Json key_doc{{"kind", full.at("kind")},           {"space", full.at("space")},
                     {"evaluator", full.at("evaluator")}, {"metric", full.at("metric")},
                     {"presets", full.at("presets")},     {"epochs", full.at("epochs")}};
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(key_doc.dump())));
  const fs::path cache = cache_root / "c0_cache.json";
  Json entries = Json::object();
  if (fs::exists(cache)) {
    try {
      entries = read_json(cache);
    } catch (const std::exception& e) {
      log(LogLevel::warning, "ignoring unreadable c0 cache " + cache.string() + ": " + e.what());
      entries = Json::object();
    }
    if (entries.contains(hex) && entries[hex].contains("c0") && entries[hex]["c0"].is_number()) {
      return entries[hex]["c0"].get<double>();
    }
  }
  const double c0 = calibrate_c0(m.plan.stage1_space, evaluator, m.metric, m.plan.presets, 0);
  entries[hex] = Json{{"c0", c0}, {"key", key_doc}};
  fs::create_directories(cache_root);
  write_text(cache, dump_json(entries));
  return c0;
}

fs::path subrun_dir(const fs::path& root, double w_c) { return root / ("wc-" + format_double(w_c)); }

SearchArtifacts run_search(const RunManifest& m, double w_c, double c0, Evaluator& evaluator, const fs::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(dir);
  write_text(dir / "manifest.json", dump_json(subrun_manifest(m, w_c)));
  TraceLog trace(dir / "trace.jsonl");
  trace.append(header_record(m, w_c, c0, evaluator));
  evaluator.set_epochs(m.plan.epochs);
  RunContext ctx{m.plan, ObjectiveSpec{w_c, m.metric, c0}, evaluator, trace, m.seed};
  SearchArtifacts a;
  a.dir = dir;
  a.run = run_full(ctx, m.greedy_width);
  write_text(dir / "stage1.cfg", encode(a.run.stage1.incumbent));
  for (std::size_t b = 0; b < a.run.branches.size(); ++b) {
    const std::string suffix = b == 0 ? ".cfg" : ".branch" + std::to_string(b) + ".cfg";
    write_text(dir / ("stage2" + suffix), encode(a.run.branches[b].stage2.incumbent));
    write_text(dir / ("stage3" + suffix), encode(a.run.branches[b].stage3.incumbent));
  }
  if (!a.run.finals.empty()) write_text(dir / "final.cfg", encode(a.run.finals.front().config));
  write_summary(dir, trace, a.summary);
  write_run_info(dir, start);
  return a;
}

int cmd_search(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunManifest m = load_with_overrides(options);
    const fs::path root = search_root(m, options);
    auto evaluator = make_evaluator(m.evaluator, m.kind, m.plan.epochs);
    const double c0 = resolve_c0(m, *evaluator, root);
    for (double w : m.w_c) {
      const auto a = run_search(m, w, c0, *evaluator, subrun_dir(root, w));
      const Json& f = a.summary.at("final");
      out << "w_c=" << format_double(w) << " f=" << csv_number(summary_number(f, "f"))
          << " acc=" << csv_number(summary_number(f, "best_val_acc")) << " t_tr_sec=" << csv_number(summary_number(f, "t_tr_sec"))
          << " n_params=" << csv_number(summary_number(f, "n_params"))
          << " evaluations=" << a.summary.at("evaluations").at("total") << " dir=" << a.dir.string() << "\n";
    }
    return kExitOk;
  });
}

int cmd_compare(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunManifest m = load_with_overrides(options);
    std::vector<BoMode> modes;
    if (options.modes.empty()) modes = {BoMode::random, BoMode::grid, BoMode::balanced, BoMode::extreme};
    for (const auto& s : options.modes) {
      try {
        modes.push_back(parse_bo_mode(s));
      } catch (const std::invalid_argument& e) {
        throw ManifestError(std::string("--mode: ") + e.what());
      }
    }
    for (auto mode : modes)
      if (mode == BoMode::custom) throw ManifestError("--mode: compare accepts random, grid, balanced or extreme");
    const std::vector<std::uint64_t> seeds = options.seeds.empty() ? std::vector<std::uint64_t>{m.seed} : options.seeds;
    const fs::path root = search_root(m, options, "-compare");
    auto evaluator = make_evaluator(m.evaluator, m.kind, m.plan.epochs);
    const double c0 = resolve_c0(m, *evaluator, root);
    std::ostringstream csv;
    csv << "mode,seed,w_c,stage1_f,final_f,final_acc,final_t_tr_sec,stage1_evals,stage3_evals\n";
    std::map<std::pair<double, std::string>, std::vector<double>> finals;
    for (double w : m.w_c) {
      for (auto mode : modes) {
        for (auto seed : seeds) {
          RunManifest run = m;
          run.seed = seed;
          const auto preset = BoSettings::preset(mode);
          for (BoSettings* s : {&run.plan.stage1, &run.plan.stage3}) {
            const double keep_xi = s->xi, keep_noise = s->noise;
            const int keep_n3 = s->n3;
            const bool keep_rec = s->record_candidates;
            *s = preset;
            s->xi = keep_xi;
            s->noise = keep_noise;
            s->n3 = keep_n3;
            s->record_candidates = keep_rec;
          }
          const fs::path dir = root / (std::string(to_string(mode)) + "-seed" + std::to_string(seed)) / ("wc-" + format_double(w));
          fs::create_directories(dir);
          TraceLog trace(dir / "trace.jsonl");
          trace.append(header_record(run, w, c0, *evaluator));
          RunContext ctx{run.plan, ObjectiveSpec{w, run.metric, c0}, *evaluator, trace, seed};
          const StageOutcome s1 = run_stage1(ctx);
          const StageOutcome s3 = run_stage3(ctx, s1.incumbent);
          trace.append(Json{{"type", "final"}, {"rank", 0}, {"branch", 0}, {"rank_in_branch", 0},
                            {"config", encode(s3.incumbent)}, {"eval", s3.incumbent_seq}});
          Json summary;
          write_summary(dir, trace, summary);
          csv << to_string(mode) << "," << seed << "," << format_double(w) << "," << csv_number(s1.score.f) << ","
              << csv_number(s3.score.f) << "," << csv_number(s3.score.result.best_val_acc) << ","
              << csv_number(s3.score.result.t_tr_sec) << "," << s1.evaluations.size() << "," << s3.evaluations.size()
              << "\n";
          finals[{w, std::string(to_string(mode))}].push_back(s3.score.f);
        }
      }
    }
    write_text(root / "compare.csv", csv.str());
    out << csv.str();
    out << "\nmedian final f\n";
    for (auto& [key, values] : finals) {
      std::sort(values.begin(), values.end());
      const std::size_t n = values.size();
      const double med = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
      out << "w_c=" << format_double(key.first) << " " << key.second << " " << csv_number(med) << "\n";
    }
    return kExitOk;
  });
}

int cmd_transfer(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.source.empty()) throw ManifestError("--source <run dir> is required");
    const fs::path source(options.source);
    const fs::path arch_file = source / "stage2.cfg";
    if (!fs::exists(arch_file) || !fs::exists(source / "summary.json")) {
      throw ManifestError("source run " + source.string() + " lacks stage2.cfg or summary.json; it must complete Stage 2");
    }
    const Config arch = decode(read_text(arch_file));
    const Json source_summary = read_json(source / "summary.json");
    const std::string source_id = source_summary.at("run").value("name", std::string("run")) + ":" + source.filename().string();

    RunManifest m = load_with_overrides(options);
    if (m.kind != arch.kind()) throw ManifestError("target manifest kind does not match the source architecture");
    auto evaluator = make_evaluator(m.evaluator, m.kind, m.plan.epochs);
    check_compatible(arch, evaluator->contract().dataset);
    const double w_c = m.w_c.front();
    const fs::path dir = search_root(m, options, "-transfer");
    fs::create_directories(dir);
    const auto start = std::chrono::steady_clock::now();
    const double c0 = resolve_c0(m, *evaluator, dir);
    write_text(dir / "manifest.json", dump_json(subrun_manifest(m, w_c)));
    TraceLog trace(dir / "trace.jsonl");
    Json header = header_record(m, w_c, c0, *evaluator);
    header["transferred_from"] = source_id;
    trace.append(header);
    RunContext ctx{m.plan, ObjectiveSpec{w_c, m.metric, c0}, *evaluator, trace, m.seed};
    const StageOutcome s3 = search_transfer(ctx, arch);
    trace.append(Json{{"type", "final"}, {"rank", 0}, {"branch", 0}, {"rank_in_branch", 0},
                      {"config", encode(s3.incumbent)}, {"eval", s3.incumbent_seq}});
    write_text(dir / "stage3.cfg", encode(s3.incumbent));
    write_text(dir / "final.cfg", encode(s3.incumbent));
    Json summary;
    write_summary(dir, trace, summary);
    write_run_info(dir, start);

    const Json& native = source_summary.at("final");
    std::ostringstream csv;
    csv << "variant,f,best_val_acc,t_tr_sec,n_params\n";
    csv << "native," << csv_number(summary_number(native, "f")) << "," << csv_number(summary_number(native, "best_val_acc"))
        << "," << csv_number(summary_number(native, "t_tr_sec")) << "," << csv_number(summary_number(native, "n_params")) << "\n";
    csv << "transfer," << csv_number(s3.score.f) << "," << csv_number(s3.score.result.best_val_acc) << ","
        << csv_number(s3.score.result.t_tr_sec) << "," << s3.score.result.n_params << "\n";
    write_text(dir / "transfer_report.csv", csv.str());
    out << "transferred-from: " << source_id << "\n" << csv.str() << "dir=" << dir.string() << "\n";
    return kExitOk;
  });
}

std::vector<BoEvaluation> stage3_from_trace(const std::vector<Json>& records) {
  std::vector<BoEvaluation> out;
  for (const auto& r : records) {
    if (r.value("type", "") != "eval" || r.at("stage") != 3 || r.at("branch") != 0) continue;
    BoEvaluation e;
    e.index = static_cast<int>(out.size());
    e.step = r.at("step").get<int>();
    e.config = decode(r.at("config").get<std::string>());
    e.timestamp = r.at("timestamp").get<double>();
    if (r.at("status") == "ok") {
      e.score.f = r.at("f").get<double>();
      e.score.f_p = r.at("f_p").get<double>();
      e.score.f_c = r.at("f_c").get<double>();
      e.score.metric_value = r.at("metric_value").get<double>();
      e.score.result.best_val_acc = r.at("best_val_acc").get<double>();
      e.score.result.t_tr_sec = r.at("t_tr_sec").get<double>();
      e.score.result.n_params = r.at("n_params").get<std::int64_t>();
      e.score.result.epochs_run = r.at("epochs_run").get<int>();
    } else {
      e.score.failed = true;
      e.score.f = e.score.f_p = std::numeric_limits<double>::infinity();
      e.score.result = EvalResult::failure(r.value("reason", std::string()));
    }
    out.push_back(std::move(e));
  }
  return out;
}

int cmd_ensemble(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.source.empty()) throw ManifestError("--run <run dir> is required");
    const fs::path dir(options.source);
    const auto records = read_trace(dir / "trace.jsonl");
    if (records.empty() || records.front().value("type", "") != "header") throw ManifestError("trace has no header record");
    const Json& header = records.front();
    const RunManifest m = parse_manifest(header.at("manifest"));
    const auto sel = ensemble_select(stage3_from_trace(records), options.n, m.plan.stage3.budget(),
                                     dataset_from_json(header.at("evaluator").at("dataset")),
                                     capabilities_from(header.at("evaluator").at("capabilities")));
    Json members = Json::array();
    for (std::size_t i = 0; i < sel.members.size(); ++i) {
      members.push_back(Json{{"config", encode(sel.members[i])}, {"f", sel.scores[i].f},
                             {"best_val_acc", sel.scores[i].result.best_val_acc}});
    }
    const Json doc{{"n", options.n},
                   {"member_params", sel.member_params},
                   {"effective_params", sel.effective_params},
                   {"members", members},
                   {"vote", sel.vote}};
    const fs::path target = options.out ? fs::path(*options.out) : dir / "ensemble.json";
    write_text(target, dump_json(doc));
    out << "ensemble of " << options.n << ": effective_params=" << sel.effective_params << " written to " << target.string()
        << "\n";
    return kExitOk;
  });
}

std::string export_tradeoff(const std::vector<fs::path>& run_dirs) {
  struct Row {
    double w_c, acc, t_tr, n_params, cost;
  };
  std::vector<Row> rows;
  for (const auto& dir : run_dirs) {
    const Json s = read_json(dir / "summary.json");
    const Json& f = s.at("final");
    rows.push_back({s.at("run").at("w_c").get<double>(), summary_number(f, "best_val_acc"), summary_number(f, "t_tr_sec"),
                    summary_number(f, "n_params"), s.at("search_cost_sec").get<double>()});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.w_c < b.w_c; });
  std::ostringstream csv;
  csv << "w_c,acc,t_tr_sec,n_params,search_cost_sec\n";
  for (const auto& r : rows) {
    csv << format_double(r.w_c) << "," << csv_number(r.acc) << "," << csv_number(r.t_tr) << "," << csv_number(r.n_params)
        << "," << csv_number(r.cost) << "\n";
  }
  return csv.str();
}

int cmd_export(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.runs.empty()) throw ManifestError("export needs at least one run directory");
    std::vector<fs::path> dirs;
    for (const auto& r : options.runs) {
      const fs::path p(r);
      if (fs::exists(p / "summary.json")) {
        dirs.push_back(p);
        continue;
      }
      if (!fs::is_directory(p)) throw ManifestError("no run directory at " + p.string());
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_directory() && fs::exists(entry.path() / "summary.json")) found.push_back(entry.path());
      if (found.empty()) throw ManifestError(p.string() + " holds no completed runs");
      std::sort(found.begin(), found.end());
      dirs.insert(dirs.end(), found.begin(), found.end());
    }
    const std::string csv = export_tradeoff(dirs);
    if (options.out) write_text(*options.out, csv);
    else out << csv;
    return kExitOk;
  });
}

}  // namespace cxs
