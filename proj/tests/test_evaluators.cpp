// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "cxsearch/dataset.hpp"
#include "cxsearch/evaluator.hpp"
#include "cxsearch/external.hpp"
#include "cxsearch/mlp_trainer.hpp"
#include "cxsearch/synthetic.hpp"
#include "support.hpp"

using namespace cxs;
using namespace std::chrono_literals;

namespace {

Config mlp(std::vector<int> hidden, double drop = 0.2) { return Config{MlpArch{std::move(hidden), drop}, {}}; }

ExternalSettings echo(std::vector<std::string> flags = {}) {
  ExternalSettings s;
  s.command = {ECHO_EVALUATOR_PATH};
  s.command.insert(s.command.end(), flags.begin(), flags.end());
  s.dataset = default_synthetic_dataset(ArchKind::mlp);
  s.timeout = 2s;
  s.handshake_timeout = 5s;
  return s;
}

bool contains(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("parameter counts") {
  CHECK(count_params(MlpArch{{}, 0.2}, 784, 10) == 7850);
  CHECK(count_params(MlpArch{{400}, 0.2}, 784, 10) == (784 + 1) * 400 + (400 + 1) * 10);
  CHECK(count_params(MlpArch{{400}, 0.2}, 784, 10) == 318010);
  CnnArch one;
  one.channels = {16};
  one.bn_fraction = {4};
  CHECK(count_params(one, 3, 10) == 9 * 3 * 16 + 16 + 32 + 16 * 10 + 10);
  CHECK(count_params(one, 3, 10) == 650);

  // Shortcut over layers 1..2 from 3 input channels to 16 needs a projection.
  CnnArch two;
  two.channels = {16, 16};
  two.bn_fraction = {0};
  two.shortcuts = ShortcutPolicy::every_other;
  const std::int64_t plain = (9 * 3 * 16 + 16) + (9 * 16 * 16 + 16) + 16 * 10 + 10;
  CHECK(count_params(two, 3, 10) == plain + 3 * 16 + 16);
  two.shortcuts = ShortcutPolicy::none;
  CHECK(count_params(two, 3, 10) == plain);
}

TEST_CASE("engine count matches the trainer's allocation") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    std::vector<int> hidden(std::uniform_int_distribution<int>(0, 3)(rng));
    for (int& h : hidden) h = std::uniform_int_distribution<int>(1, 500)(rng);
    const int in = std::uniform_int_distribution<int>(1, 800)(rng);
    const int classes = std::uniform_int_distribution<int>(2, 20)(rng);
    CHECK(count_params(MlpArch{hidden, 0.1}, in, classes) == allocated_params(MlpArch{hidden, 0.1}, in, classes));
  }
}

TEST_CASE("compatibility pre-flight") {
  CnnArch a;
  a.channels = {60, 70, 130, 260};
  a.downsampling.assign(3, Downsample::maxpool);
  const Config c{a, {}};
  DatasetDescriptor img{"img", 0, 3, 8, 8, 10, 1000};
  CHECK_NOTHROW(check_compatible(c, img));
  img.height = img.width = 4;  // three halvings need at least 8 pixels
  CHECK_THROWS_AS(check_compatible(c, img), IncompatibleArchitecture);
  const DatasetDescriptor flat{"flat", 64, 0, 0, 0, 10, 1000};
  CHECK_THROWS_AS(check_compatible(c, flat), IncompatibleArchitecture);
  CHECK_NOTHROW(check_compatible(mlp({10}), flat));
  CHECK_NOTHROW(check_compatible(mlp({10}), img));
}

TEST_CASE("synthetic evaluator is deterministic and follows its cost model") {
  const auto dataset = default_synthetic_dataset(ArchKind::mlp);
  SyntheticEvaluator ev({SyntheticFamily::interacting, 0.0, 0}, dataset);
  const Config c = mlp({100, 50});
  const EvalResult a = ev.run(c, 1);
  const EvalResult b = ev.run(c, 1);
  CHECK(a.best_val_acc == b.best_val_acc);
  CHECK(a.t_tr_sec == b.t_tr_sec);
  CHECK(a.n_params == count_params(c, dataset));
  CHECK(a.t_tr_sec == synthetic_t_tr(c, dataset, ev.settings()));
  const double macs = 64.0 * 100 + 100.0 * 50 + 50.0 * 10;
  CHECK(forward_macs(c, dataset) == macs);
  CHECK(a.t_tr_sec == doctest::Approx(2e-3 * std::ceil(5000.0 / 256) + 1e-9 * 5000 * macs));
  CHECK(ev.contract().capabilities.deterministic);

  SyntheticEvaluator noisy({SyntheticFamily::separable, 0.01, 0}, dataset);
  CHECK(noisy.run(c, 1).best_val_acc == noisy.run(c, 1).best_val_acc);
  CHECK(noisy.run(c, 1).best_val_acc != noisy.run(c, 2).best_val_acc);
}

TEST_CASE("interacting family couples learning rate and batch size") {
  const auto dataset = default_synthetic_dataset(ArchKind::mlp);
  const SyntheticSettings s{SyntheticFamily::interacting, 0.0, 0};
  Config small = mlp({100});
  small.training.batch_size = 64;
  Config large = small;
  large.training.batch_size = 512;
  auto best_eta = [&](Config c) {
    double best = -1, arg = 0;
    for (int i = 0; i <= 400; ++i) {
      c.training.eta = std::pow(10.0, -5.0 + i / 100.0);
      const double acc = synthetic_accuracy(c, dataset, s, 10);
      if (acc > best) best = acc, arg = std::log10(c.training.eta);
    }
    return arg;
  };
  CHECK(best_eta(large) - best_eta(small) == doctest::Approx(std::log10(8.0)).epsilon(0.02));
}

TEST_CASE("evaluators reject unsupported kinds without throwing") {
  std::vector<int> y(40);
  for (int i = 0; i < 40; ++i) y[i] = i % 2;
  Dataset d{"toy", Eigen::MatrixXf::Random(4, 40), y, 2};
  MlpTrainer trainer(split(d, 0.5, 0.25, 0), 2);
  CnnArch a;
  a.channels = {16};
  const EvalResult r = trainer.run(Config{a, {}}, 0);
  CHECK(r.failed);
  CHECK(contains(r.failure_reason, "CNN"));
}

TEST_CASE("datasets") {
  const Dataset digits = load_digits();
  CHECK(digits.size() == 1797);
  CHECK(digits.features() == 64);
  CHECK(digits.num_classes == 10);
  CHECK(digits.x.maxCoeff() <= 1.0f);
  CHECK(digits.x.minCoeff() >= 0.0f);

  const Dataset blobs = make_blobs(100, 3, 8, 4.0, 1);
  const DatasetSplits s = split(blobs, 0.6, 0.2, 7);
  CHECK(s.train.size() == 180);
  CHECK(s.val.size() == 60);
  CHECK(s.test.size() == 60);
  std::vector<int> per_class(3);
  for (int label : s.val.y) ++per_class[label];
  CHECK(per_class == std::vector<int>{20, 20, 20});
}

TEST_CASE("warm-epoch timing") {
  CHECK(median_warm_epoch({5.0}) == 5.0);
  CHECK(median_warm_epoch({5.0, 1.0}) == 1.0);
  CHECK(median_warm_epoch({9.0, 3.0, 1.0, 2.0, 100.0}) == 2.0);
}

TEST_CASE("builtin trainer on separable blobs") {
  const DatasetSplits s = split(make_blobs(200, 3, 8, 4.0, 0), 0.6, 0.2, 0);
  MlpTrainer trainer(s, 10);
  Config c = mlp({50}, 0.1);
  c.training.eta = 3e-3;
  c.training.batch_size = 32;
  const EvalResult r = trainer.run(c, 1);
  REQUIRE_FALSE(r.failed);
  CHECK(r.best_val_acc >= 0.95);
  CHECK(r.n_params == count_params(c.mlp(), 8, 3));
  CHECK(r.t_tr_sec > 0.0);

  const EvalResult none = trainer.run(mlp({}), 1);
  CHECK(none.n_params == 8 * 3 + 3);

  // Same seed, same result.
  CHECK(trainer.run(c, 1).best_val_acc == r.best_val_acc);
}

TEST_CASE("weight decay shrinks the parameters") {
  const DatasetSplits s = split(make_blobs(100, 3, 8, 4.0, 0), 0.6, 0.2, 0);
  TrainingHP hp;
  hp.eta = 3e-3;
  hp.batch_size = 32;
  const TrainOutcome free = train_mlp(MlpArch{{30}, 0.0}, hp, s.train, s.val, 5, 3);
  hp.lambda = 0.1;
  const TrainOutcome decayed = train_mlp(MlpArch{{30}, 0.0}, hp, s.train, s.val, 5, 3);
  CHECK(decayed.param_norm < free.param_norm);
  CHECK(free.eval_acc.size() == 5u);
}

TEST_CASE("diverging training is reported as a failure") {
  const DatasetSplits s = split(make_blobs(100, 3, 8, 4.0, 0), 0.6, 0.2, 0);
  MlpTrainer trainer(s, 3);
  Config c = mlp({50}, 0.0);
  c.training.eta = 1e12;
  const EvalResult r = trainer.run(c, 0);
  if (r.failed) CHECK(contains(r.failure_reason, "non-finite"));
  else CHECK(std::isfinite(r.best_val_acc));
}

// ---- external evaluator over the wire protocol -------------------------

TEST_CASE("echo evaluator round-trips the declared accuracy bit for bit") {
  ExternalEvaluator ev(echo());
  CHECK(ev.contract().capabilities.mlp);
  CHECK(ev.contract().capabilities.cnn);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 0.999);
  for (int i = 0; i < 50; ++i) {
    const double p = u(rng);
    const EvalResult r = ev.run(mlp({10}, p), 9);
    REQUIRE_FALSE(r.failed);
    CHECK(r.best_val_acc == p);
    CHECK(r.n_params == 42);
    CHECK(r.t_tr_sec == 0.5);
  }
  CHECK(ev.last_id() == 50);
}

TEST_CASE("handshake failures surface before any evaluation") {
  CHECK_THROWS_AS(ExternalEvaluator(echo({"--version", "2"})), ProtocolError);
  CHECK_THROWS_AS(ExternalEvaluator(echo({"--silent-hello"})), ProtocolError);
  ExternalSettings missing = echo();
  missing.command = {"/nonexistent/evaluator-binary"};
  CHECK_THROWS_AS(ExternalEvaluator{missing}, ProtocolError);
  try {
    ExternalEvaluator ev(echo({"--version", "7"}));
    FAIL("expected a version mismatch");
  } catch (const ProtocolError& e) {
    CHECK(contains(e.what(), "version"));
  }
}

TEST_CASE("capabilities gate requests") {
  ExternalEvaluator ev(echo({"--caps", "mlp"}));
  CnnArch a;
  a.channels = {16};
  const EvalResult r = ev.run(Config{a, {}}, 0);
  CHECK(r.failed);
  CHECK(ev.last_id() == 0);  // nothing was sent
}

TEST_CASE("error responses become failed results and the child stays up") {
  ExternalEvaluator ev(echo({"--fail-on-id", "2"}));
  const pid_t pid = ev.pid();
  CHECK_FALSE(ev.run(mlp({10}, 0.25), 0).failed);
  const EvalResult bad = ev.run(mlp({10}, 0.25), 0);
  CHECK(bad.failed);
  CHECK(contains(bad.failure_reason, "injected failure"));
  CHECK(contains(bad.failure_reason, "transcript"));
  const EvalResult after = ev.run(mlp({10}, 0.25), 0);
  CHECK_FALSE(after.failed);
  CHECK(ev.pid() == pid);
}

TEST_CASE("stale responses are skipped") {
  ExternalEvaluator ev(echo({"--stale"}));
  for (int i = 0; i < 3; ++i) {
    const EvalResult r = ev.run(mlp({10}, 0.125), 0);
    REQUIRE_FALSE(r.failed);
    CHECK(r.best_val_acc == 0.125);
  }
}

TEST_CASE("responses from the future fail the request") {
  ExternalEvaluator ev(echo({"--future-id"}));
  const EvalResult r = ev.run(mlp({10}, 0.125), 0);
  CHECK(r.failed);
  CHECK(contains(r.failure_reason, "future"));
}

TEST_CASE("malformed output kills and respawns the child") {
  ExternalEvaluator ev(echo({"--garbage-on-id", "1"}));
  const pid_t first = ev.pid();
  const EvalResult r = ev.run(mlp({10}, 0.5), 0);
  CHECK(r.failed);
  CHECK(contains(r.failure_reason, "malformed"));
  const EvalResult next = ev.run(mlp({10}, 0.5), 0);
  CHECK_FALSE(next.failed);
  CHECK(next.best_val_acc == 0.5);
  CHECK(ev.pid() != first);
}

TEST_CASE("a crashing child fails the request and is restarted") {
  ExternalEvaluator ev(echo({"--exit-on-id", "1"}));
  const EvalResult r = ev.run(mlp({10}, 0.5), 0);
  CHECK(r.failed);
  CHECK(contains(r.failure_reason, "exited"));
  CHECK_FALSE(ev.run(mlp({10}, 0.5), 0).failed);
}

TEST_CASE("timeouts fail the request") {
  ExternalSettings s = echo({"--hang-on-id", "1"});
  s.timeout = 300ms;
  ExternalEvaluator ev(s);
  const auto start = std::chrono::steady_clock::now();
  const EvalResult r = ev.run(mlp({10}, 0.5), 0);
  CHECK(r.failed);
  CHECK(contains(r.failure_reason, "timed out"));
  CHECK(std::chrono::steady_clock::now() - start < 5s);
  CHECK_FALSE(ev.run(mlp({10}, 0.5), 0).failed);
}

TEST_CASE("out-of-range results are rejected") {
  ExternalEvaluator ev(echo({"--bad-acc-on-id", "1"}));
  const EvalResult r = ev.run(mlp({10}, 0.5), 0);
  CHECK(r.failed);
  CHECK(contains(r.failure_reason, "best_val_acc"));
}
