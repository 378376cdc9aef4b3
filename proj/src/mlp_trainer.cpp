// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/mlp_trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace cxs {

namespace {

using Mat = Eigen::MatrixXf;
using Vec = Eigen::VectorXf;

struct Dense {
  Mat w, mw, vw;
  Vec b, mb, vb;
};

std::vector<Dense> build(const MlpArch& arch, int input_features, int num_classes, std::mt19937_64& rng) {
  std::vector<int> dims{input_features};
  dims.insert(dims.end(), arch.hidden_nodes.begin(), arch.hidden_nodes.end());
  dims.push_back(num_classes);
  std::vector<Dense> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l], fan_out = dims[l + 1];
    std::normal_distribution<float> init(0.0f, std::sqrt(2.0f / static_cast<float>(fan_in)));
    Dense d;
    d.w.resize(fan_out, fan_in);
    for (Eigen::Index j = 0; j < d.w.cols(); ++j)
      for (Eigen::Index i = 0; i < d.w.rows(); ++i) d.w(i, j) = init(rng);
    d.b = Vec::Constant(fan_out, 0.1f);
    d.mw = d.vw = Mat::Zero(fan_out, fan_in);
    d.mb = d.vb = Vec::Zero(fan_out);
    layers.push_back(std::move(d));
  }
  return layers;
}

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng) {
  Mat mask(rows, cols);
  std::bernoulli_distribution keep(1.0 - p);
  const float scale = static_cast<float>(1.0 / (1.0 - p));
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) mask(i, j) = keep(rng) ? scale : 0.0f;
  return mask;
}

double accuracy(const std::vector<Dense>& layers, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  Mat a = data.x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Mat z = (layers[l].w * a).colwise() + layers[l].b;
    a = l + 1 < layers.size() ? Mat(z.cwiseMax(0.0f)) : z;
  }
  int correct = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    Eigen::Index arg = 0;
    a.col(j).maxCoeff(&arg);
    correct += static_cast<int>(arg) == data.y[static_cast<std::size_t>(j)];
  }
  return static_cast<double>(correct) / data.size();
}

struct Adam {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  template <class P, class G>
  void update(P& param, P& m, P& v, const G& grad, double lr, double decay) const {
    const auto b1 = static_cast<float>(beta1), b2 = static_cast<float>(beta2);
    m = b1 * m + (1.0f - b1) * grad;
    v = b2 * v + (1.0f - b2) * grad.cwiseProduct(grad);
    const auto c1 = static_cast<float>(1.0 - std::pow(beta1, static_cast<double>(step)));
    const auto c2 = static_cast<float>(1.0 - std::pow(beta2, static_cast<double>(step)));
    if (decay > 0.0) param *= static_cast<float>(1.0 - lr * decay);
    param.array() -= static_cast<float>(lr) * (m.array() / c1) / ((v.array() / c2).sqrt() + static_cast<float>(eps));
  }
};

}  // namespace

TrainOutcome train_mlp(const MlpArch& arch, const TrainingHP& hp, const Dataset& train, const Dataset& eval,
                       int epochs, std::uint64_t seed) {
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (train.size() == 0) throw std::invalid_argument("empty training set");
  std::mt19937_64 rng(seed);
  auto layers = build(arch, train.features(), train.num_classes, rng);
  TrainOutcome out;
  for (const auto& d : layers) out.n_params += d.w.size() + d.b.size();

  const int n = train.size();
  const int batch = std::max(1, std::min(hp.batch_size, n));
  const double p = arch.drop_prob;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Adam adam;
  std::vector<Mat> acts(layers.size() + 1), masks(layers.size()), pre(layers.size());

  for (int e = 0; e < epochs && !out.diverged; ++e) {
    double lr = hp.eta;
    if (4 * e >= 2 * epochs) lr *= 0.2;
    if (4 * e >= 3 * epochs) lr *= 0.2;
    std::shuffle(order.begin(), order.end(), rng);
    const auto t0 = std::chrono::steady_clock::now();
    for (int start = 0; start < n; start += batch) {
      const int bsz = std::min(batch, n - start);
      Mat x(train.features(), bsz);
      Mat y = Mat::Zero(train.num_classes, bsz);
      for (int j = 0; j < bsz; ++j) {
        const int idx = order[static_cast<std::size_t>(start + j)];
        x.col(j) = train.x.col(idx);
        y(train.y[static_cast<std::size_t>(idx)], j) = 1.0f;
      }
      // Forward. masks[l] is applied to the input of layer l.
      acts[0] = std::move(x);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        if (p > 0.0) {
          masks[l] = dropout_mask(acts[l].rows(), bsz, p, rng);
          acts[l] = acts[l].cwiseProduct(masks[l]);
        }
        pre[l] = (layers[l].w * acts[l]).colwise() + layers[l].b;
        acts[l + 1] = l + 1 < layers.size() ? Mat(pre[l].cwiseMax(0.0f)) : pre[l];
      }
      Mat& logits = acts.back();
      const Eigen::RowVectorXf shift = logits.colwise().maxCoeff();
      Mat prob = (logits.rowwise() - shift).array().exp().matrix();
      const Eigen::RowVectorXf denom = prob.colwise().sum();
      double loss = 0.0;
      for (int j = 0; j < bsz; ++j) {
        Eigen::Index label = 0;
        y.col(j).maxCoeff(&label);
        loss -= std::log(static_cast<double>(prob(label, j)) / denom(j) + 1e-30);
      }
      loss /= bsz;
      if (!std::isfinite(loss)) {
        out.diverged = true;
        out.diverged_epoch = e;
        break;
      }
      prob.array().rowwise() /= denom.array();
      // Backward.
      Mat delta = (prob - y) / static_cast<float>(bsz);
      ++adam.step;
      for (std::size_t l = layers.size(); l-- > 0;) {
        Mat gw = delta * acts[l].transpose();
        Vec gb = delta.rowwise().sum();
        if (l > 0) {
          delta = layers[l].w.transpose() * delta;
          if (p > 0.0) delta = delta.cwiseProduct(masks[l]);
          delta = delta.cwiseProduct((pre[l - 1].array() > 0.0f).cast<float>().matrix());
        }
        adam.update(layers[l].w, layers[l].mw, layers[l].vw, gw, lr, hp.lambda);
        adam.update(layers[l].b, layers[l].mb, layers[l].vb, gb, lr, hp.lambda);
      }
    }
    if (out.diverged) break;
    out.epoch_sec.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    bool finite = true;
    for (const auto& d : layers) finite = finite && d.w.allFinite() && d.b.allFinite();
    if (!finite) {
      out.diverged = true;
      out.diverged_epoch = e;
      break;
    }
    out.eval_acc.push_back(accuracy(layers, eval));
  }
  double sq = 0.0;
  for (const auto& d : layers) sq += static_cast<double>(d.w.squaredNorm()) + static_cast<double>(d.b.squaredNorm());
  out.param_norm = std::sqrt(sq);
  return out;
}

std::int64_t allocated_params(const MlpArch& arch, int input_features, int num_classes) {
  std::mt19937_64 rng(0);
  std::int64_t total = 0;
  for (const auto& d : build(arch, input_features, num_classes, rng)) total += d.w.size() + d.b.size();
  return total;
}

double median_warm_epoch(const std::vector<double>& epoch_sec) {
  if (epoch_sec.empty()) return 0.0;
  if (epoch_sec.size() == 1) return epoch_sec[0];
  std::vector<double> warm(epoch_sec.begin() + 1, epoch_sec.begin() + static_cast<long>(std::min<std::size_t>(4, epoch_sec.size())));
  std::sort(warm.begin(), warm.end());
  const std::size_t m = warm.size();
  return m % 2 == 1 ? warm[m / 2] : 0.5 * (warm[m / 2 - 1] + warm[m / 2]);
}

namespace {

DatasetDescriptor describe(const DatasetSplits& s) {
  DatasetDescriptor d;
  d.name = s.train.name;
  d.features = s.train.features();
  d.num_classes = s.train.num_classes;
  d.train_size = s.train.size();
  return d;
}

EvalResult to_result(const TrainOutcome& t, bool best_over_epochs) {
  if (t.diverged) return EvalResult::failure("non-finite training loss at epoch " + std::to_string(t.diverged_epoch + 1));
  EvalResult r;
  r.best_val_acc = best_over_epochs ? *std::max_element(t.eval_acc.begin(), t.eval_acc.end()) : t.eval_acc.back();
  r.t_tr_sec = median_warm_epoch(t.epoch_sec);
  r.n_params = t.n_params;
  r.epochs_run = static_cast<int>(t.eval_acc.size());
  return r;
}

}  // namespace

MlpTrainer::MlpTrainer(DatasetSplits splits, int epochs)
    : Evaluator(EvaluatorContract{"builtin-mlp", {false, true, false, false}, describe(splits), epochs, {}}),
      splits_(std::move(splits)) {}

EvalResult MlpTrainer::evaluate(const Config& config, std::uint64_t seed) {
  check_compatible(config, contract_.dataset);
  return to_result(train_mlp(config.mlp(), config.training, splits_.train, splits_.val, contract_.epochs, seed), true);
}

EvalResult MlpTrainer::final_evaluate(const Config& config, int epochs, std::uint64_t seed) {
  if (config.is_cnn()) return EvalResult::failure("builtin-mlp does not support CNN configs");
  if (splits_.test.size() == 0) return Evaluator::final_evaluate(config, epochs, seed);
  Dataset merged;
  merged.name = splits_.train.name;
  merged.num_classes = splits_.train.num_classes;
  merged.x.resize(splits_.train.features(), splits_.train.size() + splits_.val.size());
  merged.x << splits_.train.x, splits_.val.x;
  merged.y = splits_.train.y;
  merged.y.insert(merged.y.end(), splits_.val.y.begin(), splits_.val.y.end());
  return to_result(train_mlp(config.mlp(), config.training, merged, splits_.test, epochs, seed), false);
}

}  // namespace cxs
