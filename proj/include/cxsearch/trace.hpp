// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Append-only run trace, one JSON object per line. Record types:
//
//   header     run metadata (kind, evaluator, seed, objective, plan)
//   eval       one objective evaluation; `seq` numbers them from 0
//   candidate  one EI-scored candidate (only when requested)
//   select     a stage or sub-stage incumbent; `eval` names the winning seq
//   final      a ranked final config; `eval` names its seq
//   retrain    the optional train+val retrain of the best final config
//
// Every record gets a `timestamp` (seconds since the log was opened). The
// summary is a pure function of the records with timestamps ignored.

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxsearch/objective.hpp"

namespace cxs {

using Json = nlohmann::json;

class TraceLog {
 public:
  /// In-memory only.
  TraceLog();
  /// Also appends every record to `path` (truncated first), flushing per line.
  explicit TraceLog(const std::filesystem::path& path);

  void append(Json record);
  const std::vector<Json>& records() const { return records_; }
  /// Sequence number the next eval record will get.
  int next_eval_seq() const { return next_eval_; }

 private:
  std::vector<Json> records_;
  std::optional<std::ofstream> file_;
  std::chrono::steady_clock::time_point start_;
  double last_ = 0.0;
  int next_eval_ = 0;
};

/// Where an evaluation happened.
struct TraceTag {
  int branch = 0;
  int stage = 1;
  std::string substage;
  /// BO optimization step; -1 for prior points and grid evaluations.
  int step = -1;
};

Json eval_record(const TraceTag& tag, const Config& config, const Score& score);

std::vector<Json> read_trace(const std::filesystem::path& path);

/// Machine-readable summary computed from trace records alone.
///   search_cost_sec = sum over successful evals of t_tr_sec * epochs_run.
Json build_summary(const std::vector<Json>& records);

/// Pretty JSON text with a trailing newline.
std::string dump_json(const Json& value);

/// JSON null for non-finite values.
Json finite_or_null(double value);

}  // namespace cxs
