// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/trace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cxsearch/encoding.hpp"

namespace cxs {

TraceLog::TraceLog() : start_(std::chrono::steady_clock::now()) {}

TraceLog::TraceLog(const std::filesystem::path& path) : TraceLog() {
  file_.emplace(path, std::ios::out | std::ios::trunc);
  if (!*file_) throw std::runtime_error("cannot write trace " + path.string());
}

void TraceLog::append(Json record) {
  const double now = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  last_ = std::max(last_, now);
  record["timestamp"] = last_;
  if (record.value("type", "") == "eval") record["seq"] = next_eval_++;
  if (file_) {
    *file_ << record.dump() << '\n';
    file_->flush();
  }
  records_.push_back(std::move(record));
}

Json finite_or_null(double value) { return std::isfinite(value) ? Json(value) : Json(nullptr); }

Json eval_record(const TraceTag& tag, const Config& config, const Score& score) {
  Json r{{"type", "eval"},
         {"branch", tag.branch},
         {"stage", tag.stage},
         {"substage", tag.substage},
         {"step", tag.step},
         {"config", encode(config)},
         {"status", score.failed ? "failed" : "ok"}};
  if (score.failed) {
    r["reason"] = score.result.failure_reason;
    r["f"] = nullptr;
    return r;
  }
  r["f"] = score.f;
  r["f_p"] = score.f_p;
  r["f_c"] = score.f_c;
  r["metric_value"] = score.metric_value;
  r["best_val_acc"] = score.result.best_val_acc;
  r["t_tr_sec"] = score.result.t_tr_sec;
  r["n_params"] = score.result.n_params;
  r["epochs_run"] = score.result.epochs_run;
  return r;
}

std::vector<Json> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace " + path.string());
  std::vector<Json> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

namespace {

Json eval_view(const Json& e) {
  Json v{{"config", e.at("config")}, {"seq", e.at("seq")}, {"status", e.at("status")}, {"f", e.at("f")}};
  for (const char* key : {"f_p", "f_c", "metric_value", "best_val_acc", "t_tr_sec", "n_params"}) {
    if (e.contains(key)) v[key] = e.at(key);
  }
  return v;
}

}  // namespace

Json build_summary(const std::vector<Json>& records) {
  Json summary = Json::object();
  std::map<int, const Json*> evals;
  std::map<std::string, int> per_stage;
  int failed = 0;
  double cost = 0.0;
  Json incumbents = Json::array();
  Json finals = Json::array();
  for (const auto& r : records) {
    const std::string type = r.value("type", "");
    if (type == "header") {
      Json h = r;
      h.erase("type");
      h.erase("timestamp");
      summary["run"] = h;
    } else if (type == "eval") {
      evals[r.at("seq").get<int>()] = &r;
      per_stage["stage" + std::to_string(r.at("stage").get<int>())] += 1;
      if (r.at("status") == "ok") cost += r.at("t_tr_sec").get<double>() * r.at("epochs_run").get<double>();
      else ++failed;
    } else if (type == "select") {
      Json s{{"branch", r.at("branch")}, {"stage", r.at("stage")}, {"substage", r.at("substage")}, {"config", r.at("config")}};
      s["f"] = r.contains("eval") && !r.at("eval").is_null() ? evals.at(r.at("eval").get<int>())->at("f") : Json(nullptr);
      incumbents.push_back(std::move(s));
    } else if (type == "final") {
      Json f = eval_view(*evals.at(r.at("eval").get<int>()));
      f["rank"] = r.at("rank");
      f["branch"] = r.at("branch");
      finals.push_back(std::move(f));
    } else if (type == "retrain") {
      Json t = r;
      t.erase("type");
      t.erase("timestamp");
      summary["retrain"] = t;
    }
  }
  std::sort(finals.begin(), finals.end(), [](const Json& a, const Json& b) { return a.at("rank") < b.at("rank"); });
  Json counts = Json::object();
  int total = 0;
  for (const auto& [stage, n] : per_stage) {
    counts[stage] = n;
    total += n;
  }
  counts["total"] = total;
  counts["failed"] = failed;
  summary["evaluations"] = counts;
  summary["incumbents"] = incumbents;
  summary["finals"] = finals;
  summary["final"] = finals.empty() ? Json(nullptr) : finals.front();
  summary["search_cost_sec"] = cost;
  return summary;
}

std::string dump_json(const Json& value) { return value.dump(2) + "\n"; }

}  // namespace cxs
