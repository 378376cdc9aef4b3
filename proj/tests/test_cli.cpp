// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cxsearch/commands.hpp"
#include "cxsearch/encoding.hpp"
#include "support.hpp"

using namespace cxs;
using namespace cxs::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(CXSEARCH_CLI_PATH) + " " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmallMlp = R"({
  "name": "cli-test",
  "kind": "mlp",
  "seed": 3,
  "w_c": [0],
  "stage1": {"mode": "balanced", "n1": 4, "n2": 3, "n3": 100},
  "stage3": {"mode": "balanced", "n1": 4, "n2": 3, "n3": 100},
  "evaluator": {"type": "synthetic", "family": "separable", "noise": 0.01}
})";

}  // namespace

TEST_CASE("manifest parse and serialize reach a fixed point") {
  const RunManifest m = parse_manifest(Json::parse(kSmallMlp));
  CHECK(m.plan.stage1.n1 == 4);
  CHECK(m.plan.stage1.mode == BoMode::balanced);
  const Json once = serialize(m);
  const RunManifest again = parse_manifest(once);
  CHECK(again == m);
  CHECK(serialize(again) == once);

  for (const char* path : {"examples_manifests/mlp_synthetic.json", "examples_manifests/cnn_synthetic.json",
                           "examples_manifests/digits_builtin.json"}) {
    const RunManifest ex = load_manifest(fs::path(CXSEARCH_SOURCE_DIR) / path);
    CHECK(parse_manifest(serialize(ex)) == ex);
  }
}

TEST_CASE("manifest rejects unknown keys and bad values") {
  CHECK_THROWS_AS(parse_manifest(Json::parse(R"({"kind": "mlp", "wc": [0]})")), ManifestError);
  CHECK_THROWS_AS(parse_manifest(Json::parse(R"({"kind": "mlp", "stage1": {"n4": 1}})")), ManifestError);
  CHECK_THROWS_AS(parse_manifest(Json::parse(R"({"seed": 1})")), ManifestError);
  CHECK_THROWS_AS(parse_manifest(Json::parse(R"({"kind": "rnn"})")), ManifestError);
  CHECK_THROWS_AS(parse_manifest(Json::parse(R"({"kind": "mlp", "w_c": [-1]})")), ManifestError);
  try {
    parse_manifest(Json::parse(R"({"kind": "mlp", "evaluator": {"typo": 1}})"));
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(std::string(e.what()).find("typo") != std::string::npos);
  }
}

TEST_CASE("search writes one sub-run per w_c with byte-identical reruns") {
  const fs::path root = scratch_dir("search");
  write(root / "m.json", kSmallMlp);
  const fs::path log = root / "log.txt";
  CHECK(cli("search --manifest " + (root / "m.json").string() + " --wc 0,0.01,0.1,1,10 --out " + (root / "a").string(), log) == 0);
  CHECK(cli("search --manifest " + (root / "m.json").string() + " --wc 0,0.01,0.1,1,10 --out " + (root / "b").string(), log) == 0);
  for (const char* w : {"0", "0.01", "0.1", "1", "10"}) {
    const fs::path a = root / "a" / (std::string("wc-") + w);
    const fs::path b = root / "b" / (std::string("wc-") + w);
    REQUIRE(fs::exists(a / "summary.json"));
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    for (const char* f : {"manifest.json", "trace.jsonl", "stage1.cfg", "stage2.cfg", "stage3.cfg", "final.cfg", "run_info.json"})
      CHECK(fs::exists(a / f));
    const Json s = Json::parse(slurp(a / "summary.json"));
    CHECK(s["evaluations"]["stage1"] == 7);
    CHECK(s["evaluations"]["stage2"] == 5);
    CHECK(s["evaluations"]["stage3"] == 7);
    CHECK(s["evaluations"]["total"] == 19);
    // The summary is a pure function of the trace.
    CHECK(dump_json(build_summary(read_trace(a / "trace.jsonl"))) == slurp(a / "summary.json"));
  }

  CHECK(cli("export " + (root / "a").string() + " --out " + (root / "t.csv").string(), log) == 0);
  std::istringstream csv(slurp(root / "t.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "w_c,acc,t_tr_sec,n_params,search_cost_sec");
  std::vector<double> wc;
  while (std::getline(csv, line)) wc.push_back(parse_double(line.substr(0, line.find(','))));
  CHECK(wc == std::vector<double>{0, 0.01, 0.1, 1, 10});

  const fs::path run = root / "a" / "wc-0";
  CHECK(cli("ensemble --run " + run.string() + " --n 3", log) == 0);
  const Json ens = Json::parse(slurp(run / "ensemble.json"));
  CHECK(ens["members"].size() == 3u);
  CHECK(cli("ensemble --run " + run.string() + " --n 8", log) == 1);

  write(root / "b.json", R"({"kind": "mlp", "seed": 3, "stage3": {"mode": "balanced", "n1": 4, "n2": 3, "n3": 100},
    "evaluator": {"type": "synthetic", "family": "interacting", "noise": 0.02, "variant": 5}})");
  CHECK(cli("transfer --manifest " + (root / "b.json").string() + " --source " + run.string() + " --out " + (root / "tr").string(), log) == 0);
  CHECK(fs::exists(root / "tr" / "transfer_report.csv"));
  const std::string report = slurp(root / "tr" / "transfer_report.csv");
  CHECK(report.find("t_tr_sec") != std::string::npos);
  CHECK(report.find("f") != std::string::npos);
  fs::remove_all(root);
}

TEST_CASE("compare writes one row per mode and seed") {
  const fs::path root = scratch_dir("compare");
  write(root / "m.json", kSmallMlp);
  const fs::path log = root / "log.txt";
  REQUIRE(cli("compare --manifest " + (root / "m.json").string() + " --seeds 1,2 --out " + (root / "c").string(), log) == 0);
  std::istringstream csv(slurp(root / "c" / "compare.csv"));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    CHECK(line.find(",30,30") != std::string::npos);
  }
  CHECK(rows == 8);
  fs::remove_all(root);
}

TEST_CASE("exit codes") {
  const fs::path root = scratch_dir("exit");
  const fs::path log = root / "log.txt";
  CHECK(cli("", log) == 1);
  CHECK(cli("search", log) == 1);
  CHECK(cli("frobnicate", log) == 1);
  CHECK(cli("search --manifest /nonexistent.json", log) == 1);
  write(root / "bad.json", R"({"kind": "mlp", "bogus": true})");
  CHECK(cli("search --manifest " + (root / "bad.json").string() + " --out " + (root / "o").string(), log) == 1);
  CHECK(slurp(log).find("bogus") != std::string::npos);
  write(root / "m.json", kSmallMlp);
  CHECK(cli("search --manifest " + (root / "m.json").string() + " --wc 0,x", log) == 1);

  // Handshake failure is an evaluator error.
  write(root / "ext.json", std::string(R"({"kind": "mlp", "evaluator": {"type": "external", "command": [")") +
                               ECHO_EVALUATOR_PATH + R"(", "--version", "9"],
      "dataset": {"name": "d", "features": 64, "num_classes": 10, "train_size": 100}}})");
  CHECK(cli("search --manifest " + (root / "ext.json").string() + " --out " + (root / "e").string(), log) == 2);

  // Transfer of a CNN onto a too-small image set is refused up front.
  write(root / "cnn.json", R"({"kind": "cnn", "seed": 1,
    "stage1": {"mode": "balanced", "n1": 3, "n2": 1, "n3": 50},
    "stage3": {"mode": "balanced", "n1": 3, "n2": 1, "n3": 50},
    "stage2": {"order": []},
    "evaluator": {"type": "synthetic"}})");
  REQUIRE(cli("search --manifest " + (root / "cnn.json").string() + " --out " + (root / "cnn").string(), log) == 0);
  write(root / "tiny.json", R"({"kind": "cnn", "evaluator": {"type": "synthetic",
    "dataset": {"name": "tiny", "channels": 1, "height": 1, "width": 1, "num_classes": 10, "train_size": 100}}})");
  CHECK(cli("transfer --manifest " + (root / "tiny.json").string() + " --source " + (root / "cnn" / "wc-0").string() +
                " --out " + (root / "t").string(),
            log) == 2);
  fs::remove_all(root);
}

TEST_CASE("output root defaults to the environment variable") {
  ::setenv(kOutputRootEnv, "/tmp/somewhere", 1);
  CHECK(default_output_root() == fs::path("/tmp/somewhere"));
  ::unsetenv(kOutputRootEnv);
  CHECK(default_output_root() == fs::path("runs"));
}

TEST_CASE("number lists") {
  CHECK(parse_number_list("0,0.01,0.1,1,10") == std::vector<double>{0, 0.01, 0.1, 1, 10});
  CHECK_THROWS(parse_number_list("1,,2"));
}
