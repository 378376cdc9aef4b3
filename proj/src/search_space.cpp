// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cxs {
namespace {

std::string fmt_num(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

void normalize_weights(std::vector<HyperParam>& params) {
  if (params.empty()) return;
  const double w = 1.0 / static_cast<double>(params.size());
  for (auto& p : params) p.weight = w;
}

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p < 1.0; }

void validate_cnn(const CnnArch& arch, const CnnBounds& b, std::vector<std::string>& out) {
  const auto& c = arch.channels;
  const int depth = static_cast<int>(c.size());
  if (depth < b.min_depth) out.push_back("conv depth " + std::to_string(depth) + " below lower bound " + std::to_string(b.min_depth));
  if (depth > b.max_depth) out.push_back("conv depth " + std::to_string(depth) + " above upper bound " + std::to_string(b.max_depth));
  if (!c.empty()) {
    if (c[0] < b.min_first_channels) out.push_back("first layer channels below lower bound " + std::to_string(b.min_first_channels));
    if (c[0] > b.max_first_channels) out.push_back("first layer channels above upper bound " + std::to_string(b.max_first_channels));
  }
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    const std::string where = " at layer " + std::to_string(i + 2);
    if (c[i + 1] < c[i]) out.push_back("channel count decreases" + where);
    if (c[i + 1] > 2 * c[i]) out.push_back("channel more than doubles" + where);
    if (c[i + 1] > b.max_channels) out.push_back("channel count exceeds cap " + std::to_string(b.max_channels) + where);
  }
  const auto points = expand_downsampling(c);
  if (arch.downsampling.size() != points.size()) {
    out.push_back("downsampling has " + std::to_string(arch.downsampling.size()) + " entries but the channels define " +
                  std::to_string(points.size()) + " downsample points");
  }
  if (!arch.bn_fraction.valid()) out.push_back("bn fraction outside [0, 1]");
  if (!arch.dropout_fraction.valid()) out.push_back("dropout fraction outside [0, 1]");
  if (!is_probability(arch.input_drop_prob)) out.push_back("input drop probability outside [0, 1)");
  if (!is_probability(arch.hidden_drop_prob)) out.push_back("hidden drop probability outside [0, 1)");
}

void validate_mlp(const MlpArch& arch, const MlpBounds& b, std::vector<std::string>& out) {
  const int depth = static_cast<int>(arch.hidden_nodes.size());
  if (depth < b.min_depth) out.push_back("hidden depth " + std::to_string(depth) + " below lower bound " + std::to_string(b.min_depth));
  if (depth > b.max_depth) out.push_back("hidden depth " + std::to_string(depth) + " above upper bound " + std::to_string(b.max_depth));
  for (std::size_t i = 0; i < arch.hidden_nodes.size(); ++i) {
    const int n = arch.hidden_nodes[i];
    const std::string where = " in hidden layer " + std::to_string(i + 1);
    if (n < b.min_nodes) out.push_back("node count below lower bound " + std::to_string(b.min_nodes) + where);
    if (n > b.max_nodes) out.push_back("node count above upper bound " + std::to_string(b.max_nodes) + where);
  }
  if (!is_probability(arch.drop_prob)) out.push_back("drop probability outside [0, 1)");
}

void validate_training(const TrainingHP& hp, const TrainingBounds& b, std::vector<std::string>& out) {
  if (!(std::isfinite(hp.eta) && hp.eta > 0.0)) out.push_back("learning rate must be positive");
  if (!(std::isfinite(hp.lambda) && hp.lambda >= 0.0)) out.push_back("weight decay must be non-negative");
  if (hp.batch_size < b.min_batch) out.push_back("batch size below lower bound " + std::to_string(b.min_batch));
  if (hp.batch_size > b.max_batch) out.push_back("batch size above upper bound " + std::to_string(b.max_batch));
}

}  // namespace

int max_channels_at(const CnnBounds& bounds, int layer) {
  long long c = bounds.max_first_channels;
  for (int i = 1; i < layer && c < bounds.max_channels; ++i) c *= 2;
  return static_cast<int>(std::min<long long>(c, bounds.max_channels));
}

void rebuild_params(SearchSpace& space, double omega, double ramp_power) {
  std::vector<HyperParam> params;
  auto add = [&](std::string name, Feature feature, int layer, double lo, double hi, Scale scale) {
    if (!(lo < hi)) return;  // a fixed value carries no information
    params.push_back({std::move(name), feature, layer, lo, hi, scale, omega, ramp_power, 0.0});
  };
  switch (space.stage) {
    case Stage::core:
      if (space.kind == ArchKind::cnn) {
        for (int layer = 1; layer <= space.cnn.max_depth; ++layer) {
          add("channels_" + std::to_string(layer), Feature::cnn_channels, layer, space.cnn.min_first_channels,
              max_channels_at(space.cnn, layer), Scale::linear);
        }
      } else {
        const auto& m = space.mlp;
        add("depth", Feature::mlp_depth, 0, m.min_depth, m.max_depth, Scale::linear);
        add("node_sum", Feature::mlp_node_sum, 0, m.min_depth == 0 ? 0.0 : double(m.min_depth) * m.min_nodes,
            double(m.max_depth) * m.max_nodes, Scale::linear);
      }
      break;
    case Stage::advanced: break;
    case Stage::training: {
      const auto& t = space.training;
      add("eta", Feature::eta, 0, t.min_log_eta, t.max_log_eta, Scale::log);
      add("lambda", Feature::lambda, 0, t.min_log_lambda, t.max_log_lambda, Scale::log);
      add("batch_size", Feature::batch_size, 0, t.min_batch, t.max_batch, Scale::linear);
      break;
    }
  }
  normalize_weights(params);
  space.params = std::move(params);
}

SearchSpace core_space(ArchKind kind, const CnnBounds& cnn, const MlpBounds& mlp, const TrainingBounds& training) {
  SearchSpace space{Stage::core, kind, cnn, mlp, training, {}};
  rebuild_params(space);
  return space;
}

SearchSpace training_space(ArchKind kind, const TrainingBounds& training, const CnnBounds& cnn, const MlpBounds& mlp) {
  SearchSpace space{Stage::training, kind, cnn, mlp, training, {}};
  rebuild_params(space);
  return space;
}

SearchSpace advanced_space(ArchKind kind, const CnnBounds& cnn, const MlpBounds& mlp, const TrainingBounds& training) {
  return SearchSpace{Stage::advanced, kind, cnn, mlp, training, {}};
}

std::vector<std::string> validate(const SearchSpace& space) {
  std::vector<std::string> out;
  const auto& c = space.cnn;
  if (c.min_depth < 1 || c.min_depth > c.max_depth) out.push_back("cnn depth bounds invalid");
  if (c.min_first_channels < 1 || c.min_first_channels > c.max_first_channels) out.push_back("cnn first-layer channel bounds invalid");
  if (c.max_channels < c.max_first_channels) out.push_back("cnn channel cap below first-layer upper bound");
  const auto& m = space.mlp;
  if (m.min_depth < 0 || m.min_depth > m.max_depth) out.push_back("mlp depth bounds invalid");
  if (m.min_nodes < 1 || m.min_nodes > m.max_nodes) out.push_back("mlp node bounds invalid");
  const auto& t = space.training;
  if (!(t.min_log_eta < t.max_log_eta)) out.push_back("learning-rate exponent bounds invalid");
  if (!(t.min_log_lambda < t.max_log_lambda)) out.push_back("weight-decay exponent bounds invalid");
  if (t.min_batch < 1 || t.min_batch > t.max_batch) out.push_back("batch size bounds invalid");

  double total = 0.0;
  for (const auto& p : space.params) {
    if (!(p.lower < p.upper)) out.push_back("hyperparameter " + p.name + ": lower bound must be below upper bound");
    if (!(p.omega > 0.0)) out.push_back("hyperparameter " + p.name + ": omega must be positive");
    if (!(p.ramp_power > 0.0 && p.ramp_power <= 1.0)) out.push_back("hyperparameter " + p.name + ": ramp power must be in (0, 1]");
    if (!(p.weight >= 0.0)) out.push_back("hyperparameter " + p.name + ": weight must be non-negative");
    total += p.weight;
  }
  if (!space.params.empty() && std::abs(total - 1.0) > 1e-9) {
    out.push_back("hyperparameter weights sum to " + fmt_num(total) + ", expected 1");
  }
  return out;
}

std::vector<std::string> validate(const Config& config, const SearchSpace& space) {
  std::vector<std::string> out;
  if (config.kind() != space.kind) {
    out.push_back("config is " + std::string(to_string(config.kind())) + " but the space is " +
                  std::string(to_string(space.kind)));
  }
  if (config.is_cnn()) {
    validate_cnn(config.cnn(), space.cnn, out);
  } else {
    validate_mlp(config.mlp(), space.mlp, out);
  }
  validate_training(config.training, space.training, out);
  return out;
}

double lambda_from_exponent(double exponent, const TrainingBounds& bounds) {
  return exponent < bounds.lambda_zero_below ? 0.0 : std::pow(10.0, exponent);
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::core: return "stage1";
    case Stage::advanced: return "stage2";
    case Stage::training: return "stage3";
  }
  return "stage1";
}

std::string_view to_string(Feature feature) {
  switch (feature) {
    case Feature::cnn_channels: return "cnn_channels";
    case Feature::cnn_depth: return "cnn_depth";
    case Feature::mlp_depth: return "mlp_depth";
    case Feature::mlp_node_sum: return "mlp_node_sum";
    case Feature::eta: return "eta";
    case Feature::lambda: return "lambda";
    case Feature::batch_size: return "batch_size";
  }
  return "batch_size";
}

std::string_view to_string(Scale scale) { return scale == Scale::log ? "log" : "linear"; }

Feature parse_feature(std::string_view text) {
  for (Feature f : {Feature::cnn_channels, Feature::cnn_depth, Feature::mlp_depth, Feature::mlp_node_sum, Feature::eta,
                    Feature::lambda, Feature::batch_size}) {
    if (to_string(f) == text) return f;
  }
  throw std::invalid_argument("unknown hyperparameter feature '" + std::string(text) + "'");
}

Scale parse_scale(std::string_view text) {
  if (text == "linear") return Scale::linear;
  if (text == "log") return Scale::log;
  throw std::invalid_argument("unknown scale '" + std::string(text) + "'");
}

}  // namespace cxs
