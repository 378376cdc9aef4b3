// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/manifest.hpp"

#include <fstream>
#include <set>

#include "cxsearch/encoding.hpp"

namespace cxs {

namespace {

/// Reads keys from one JSON object and rejects any it did not consume.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ManifestError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const Json& v = raw(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ManifestError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ManifestError("");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_unsigned()) out = v.get<T>();
          else if (v.get<std::int64_t>() < 0) throw ManifestError("");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ManifestError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ManifestError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ManifestError(where(key) + " has the wrong type");
    }
  }

  template <class T, class Parse>
  void get_enum(const std::string& key, T& out, Parse parse) {
    if (!has(key)) return;
    std::string s;
    get(key, s);
    try {
      out = parse(s);
    } catch (const std::invalid_argument& e) {
      throw ManifestError(where(key) + ": " + e.what());
    }
  }

  template <class T, class Parse>
  void get_list(const std::string& key, std::vector<T>& out, Parse parse) {
    if (!has(key)) return;
    const Json& v = raw(key);
    if (!v.is_array()) throw ManifestError(where(key) + " must be an array");
    out.clear();
    for (const auto& item : v) {
      try {
        out.push_back(parse(item));
      } catch (const ManifestError&) {
        throw;
      } catch (const std::exception& e) {
        throw ManifestError(where(key) + ": " + e.what());
      }
    }
  }

  Reader child(const std::string& key) { return Reader(raw(key), where(key)); }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ManifestError("unknown key " + where(k));
    }
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "manifest" : "'" + path_ + "'";
    return "'" + (path_.empty() ? key : path_ + "." + key) + "'";
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

double as_number(const Json& v) {
  if (!v.is_number()) throw std::invalid_argument("expected a number");
  return v.get<double>();
}

std::string as_string(const Json& v) {
  if (!v.is_string()) throw std::invalid_argument("expected a string");
  return v.get<std::string>();
}

void read_bo(Reader r, BoSettings& s) {
  if (r.has("mode")) {
    r.get_enum("mode", s.mode, parse_bo_mode);
    s = BoSettings::preset(s.mode);
  }
  r.get_enum("prior", s.prior, parse_prior_sampling);
  r.get("n1", s.n1);
  r.get("n2", s.n2);
  r.get("n3", s.n3);
  r.get("xi", s.xi);
  r.get("noise", s.noise);
  r.get("record_candidates", s.record_candidates);
  r.finish();
}

Json write_bo(const BoSettings& s) {
  return Json{{"mode", to_string(s.mode)}, {"prior", to_string(s.prior)}, {"n1", s.n1}, {"n2", s.n2}, {"n3", s.n3},
              {"xi", s.xi}, {"noise", s.noise}, {"record_candidates", s.record_candidates}};
}

void read_space(Reader r, RunManifest& m, CnnBounds& cnn, MlpBounds& mlp, TrainingBounds& t) {
  if (r.has("cnn")) {
    Reader c = r.child("cnn");
    c.get("min_depth", cnn.min_depth);
    c.get("max_depth", cnn.max_depth);
    c.get("min_first_channels", cnn.min_first_channels);
    c.get("max_first_channels", cnn.max_first_channels);
    c.get("max_channels", cnn.max_channels);
    c.finish();
  }
  if (r.has("mlp")) {
    Reader c = r.child("mlp");
    if (c.has("preset")) {
      std::string preset;
      c.get("preset", preset);
      if (preset == "large") mlp = MlpBounds::large();
      else if (preset != "default") throw ManifestError(c.where("preset") + " must be 'default' or 'large'");
    }
    c.get("min_depth", mlp.min_depth);
    c.get("max_depth", mlp.max_depth);
    c.get("min_nodes", mlp.min_nodes);
    c.get("max_nodes", mlp.max_nodes);
    c.finish();
  }
  if (r.has("training")) {
    Reader c = r.child("training");
    c.get("min_log_eta", t.min_log_eta);
    c.get("max_log_eta", t.max_log_eta);
    c.get("min_log_lambda", t.min_log_lambda);
    c.get("max_log_lambda", t.max_log_lambda);
    c.get("lambda_zero_below", t.lambda_zero_below);
    c.get("min_batch", t.min_batch);
    c.get("max_batch", t.max_batch);
    c.finish();
  }
  r.get("omega", m.omega);
  r.get("ramp_power", m.ramp_power);
  r.finish();
}

void read_stage2(Reader r, Stage2Grids& g) {
  r.get_list("order", g.order, [](const Json& v) { return parse_substage(as_string(v)); });
  r.get_list("bn_fractions", g.bn_fractions, [](const Json& v) { return parse_layer_fraction(as_string(v)); });
  r.get_list("dropout_fractions", g.dropout_fractions, [](const Json& v) { return parse_layer_fraction(as_string(v)); });
  r.get_list("input_drop_probs", g.input_drop_probs, as_number);
  r.get_list("hidden_drop_probs", g.hidden_drop_probs, as_number);
  r.get_list("shortcuts", g.shortcuts, [](const Json& v) { return parse_shortcut_policy(as_string(v)); });
  r.get_list("mlp_drop_probs", g.mlp_drop_probs, as_number);
  r.get("include_incumbent", g.include_incumbent);
  r.finish();
}

Json write_stage2(const Stage2Grids& g) {
  Json order = Json::array(), bn = Json::array(), drop = Json::array(), sc = Json::array();
  for (auto s : g.order) order.push_back(to_string(s));
  for (auto f : g.bn_fractions) bn.push_back(to_string(f));
  for (auto f : g.dropout_fractions) drop.push_back(to_string(f));
  for (auto s : g.shortcuts) sc.push_back(to_string(s));
  return Json{{"order", order},
              {"bn_fractions", bn},
              {"dropout_fractions", drop},
              {"input_drop_probs", g.input_drop_probs},
              {"hidden_drop_probs", g.hidden_drop_probs},
              {"shortcuts", sc},
              {"mlp_drop_probs", g.mlp_drop_probs},
              {"include_incumbent", g.include_incumbent}};
}

void read_presets(Reader r, Presets& p) {
  r.get("eta", p.eta);
  r.get("batch_size", p.batch_size);
  r.get_enum("lambda_profile", p.lambda_profile, parse_lambda_profile);
  r.get("cnn_drop_prob", p.cnn_drop_prob);
  r.get("mlp_drop_prob", p.mlp_drop_prob);
  r.get_enum("downsample", p.downsample, parse_downsample);
  r.get("shortcut_min_depth", p.shortcut_min_depth);
  r.finish();
}

Json write_presets(const Presets& p) {
  return Json{{"eta", p.eta},
              {"batch_size", p.batch_size},
              {"lambda_profile", to_string(p.lambda_profile)},
              {"cnn_drop_prob", p.cnn_drop_prob},
              {"mlp_drop_prob", p.mlp_drop_prob},
              {"downsample", to_string(p.downsample)},
              {"shortcut_min_depth", p.shortcut_min_depth}};
}

DatasetDescriptor read_dataset(Reader r) {
  DatasetDescriptor d;
  r.get("name", d.name);
  r.get("features", d.features);
  r.get("channels", d.channels);
  r.get("height", d.height);
  r.get("width", d.width);
  r.get("num_classes", d.num_classes);
  r.get("train_size", d.train_size);
  r.finish();
  return d;
}

void read_evaluator(Reader r, EvaluatorSpec& e) {
  r.get_enum("type", e.type, parse_evaluator_type);
  if (r.has("family")) r.get_enum("family", e.synthetic.family, parse_synthetic_family);
  r.get("noise", e.synthetic.noise);
  r.get("variant", e.synthetic.variant);
  r.get("step_sec", e.synthetic.step_sec);
  r.get("mac_sec", e.synthetic.mac_sec);
  if (r.has("data")) {
    Reader d = r.child("data");
    auto& s = e.data;
    d.get("source", s.source);
    d.get("scale", s.scale);
    d.get("train_fraction", s.train_fraction);
    d.get("val_fraction", s.val_fraction);
    d.get("split_seed", s.split_seed);
    d.get("blob_per_class", s.blob_per_class);
    d.get("blob_classes", s.blob_classes);
    d.get("blob_features", s.blob_features);
    d.get("blob_separation", s.blob_separation);
    d.get("blob_seed", s.blob_seed);
    d.finish();
  }
  r.get_list("command", e.command, as_string);
  r.get("timeout_sec", e.timeout_sec);
  if (r.has("dataset")) {
    if (r.raw("dataset").is_null()) e.dataset.reset();
    else e.dataset = read_dataset(r.child("dataset"));
  }
  r.finish();
  if (e.type == EvaluatorType::external && e.command.empty()) throw ManifestError("'evaluator.command' is required for external evaluators");
  if (e.type == EvaluatorType::external && !e.dataset) throw ManifestError("'evaluator.dataset' is required for external evaluators");
  if (!(e.timeout_sec > 0.0)) throw ManifestError("'evaluator.timeout_sec' must be positive");
  if (!(e.synthetic.noise >= 0.0)) throw ManifestError("'evaluator.noise' must be non-negative");
}

Json write_evaluator(const EvaluatorSpec& e) {
  const auto& s = e.data;
  return Json{{"type", to_string(e.type)},
              {"family", to_string(e.synthetic.family)},
              {"noise", e.synthetic.noise},
              {"variant", e.synthetic.variant},
              {"step_sec", e.synthetic.step_sec},
              {"mac_sec", e.synthetic.mac_sec},
              {"data", Json{{"source", s.source},
                            {"scale", s.scale},
                            {"train_fraction", s.train_fraction},
                            {"val_fraction", s.val_fraction},
                            {"split_seed", s.split_seed},
                            {"blob_per_class", s.blob_per_class},
                            {"blob_classes", s.blob_classes},
                            {"blob_features", s.blob_features},
                            {"blob_separation", s.blob_separation},
                            {"blob_seed", s.blob_seed}}},
              {"command", e.command},
              {"timeout_sec", e.timeout_sec},
              {"dataset", e.dataset ? to_json(*e.dataset) : Json(nullptr)}};
}

}  // namespace

Json to_json(const DatasetDescriptor& d) {
  return Json{{"name", d.name},     {"features", d.features},       {"channels", d.channels},
              {"height", d.height}, {"width", d.width},             {"num_classes", d.num_classes},
              {"train_size", d.train_size}};
}

DatasetDescriptor dataset_from_json(const Json& j) { return read_dataset(Reader(j, "dataset")); }

RunManifest parse_manifest(const Json& doc) {
  Reader r(doc, "");
  RunManifest m;
  if (!r.has("kind")) throw ManifestError("'kind' is required (cnn or mlp)");
  r.get_enum("kind", m.kind, parse_arch_kind);
  m.plan = StagePlan::defaults(m.kind);
  r.get("name", m.name);
  r.get("seed", m.seed);
  if (r.has("w_c")) {
    const Json& v = r.raw("w_c");
    if (v.is_number()) m.w_c = {v.get<double>()};
    else if (v.is_array()) {
      m.w_c.clear();
      for (const auto& x : v) {
        if (!x.is_number()) throw ManifestError("'w_c' entries must be numbers");
        m.w_c.push_back(x.get<double>());
      }
    } else {
      throw ManifestError("'w_c' must be a number or an array of numbers");
    }
  }
  r.get_enum("metric", m.metric, parse_metric);
  r.get("greedy_width", m.greedy_width);
  r.get("output_dir", m.output_dir);
  r.get("epochs", m.plan.epochs);
  r.get("final_epochs", m.plan.final_epochs);

  CnnBounds cnn;
  MlpBounds mlp;
  TrainingBounds training;
  if (r.has("space")) read_space(r.child("space"), m, cnn, mlp, training);
  m.plan.stage1_space = core_space(m.kind, cnn, mlp, training);
  m.plan.stage3_space = training_space(m.kind, training, cnn, mlp);
  rebuild_params(m.plan.stage1_space, m.omega, m.ramp_power);
  rebuild_params(m.plan.stage3_space, m.omega, m.ramp_power);

  if (r.has("stage1")) read_bo(r.child("stage1"), m.plan.stage1);
  if (r.has("stage2")) read_stage2(r.child("stage2"), m.plan.stage2);
  if (r.has("stage3")) read_bo(r.child("stage3"), m.plan.stage3);
  if (r.has("presets")) read_presets(r.child("presets"), m.plan.presets);
  if (r.has("evaluator")) read_evaluator(r.child("evaluator"), m.evaluator);
  r.finish();

  if (m.w_c.empty()) throw ManifestError("'w_c' must list at least one value");
  for (double w : m.w_c)
    if (!(w >= 0.0)) throw ManifestError("'w_c' values must be non-negative");
  if (m.greedy_width < 1) throw ManifestError("'greedy_width' must be at least 1");
  if (const auto errors = validate(m.plan); !errors.empty()) throw ManifestError("invalid plan: " + errors.front());
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
  return parse_manifest(doc);
}

Json serialize(const RunManifest& m) {
  const auto& c = m.plan.stage1_space.cnn;
  const auto& l = m.plan.stage1_space.mlp;
  const auto& t = m.plan.stage3_space.training;
  Json space{{"cnn", Json{{"min_depth", c.min_depth},
                          {"max_depth", c.max_depth},
                          {"min_first_channels", c.min_first_channels},
                          {"max_first_channels", c.max_first_channels},
                          {"max_channels", c.max_channels}}},
             {"mlp", Json{{"min_depth", l.min_depth}, {"max_depth", l.max_depth}, {"min_nodes", l.min_nodes}, {"max_nodes", l.max_nodes}}},
             {"training", Json{{"min_log_eta", t.min_log_eta},
                               {"max_log_eta", t.max_log_eta},
                               {"min_log_lambda", t.min_log_lambda},
                               {"max_log_lambda", t.max_log_lambda},
                               {"lambda_zero_below", t.lambda_zero_below},
                               {"min_batch", t.min_batch},
                               {"max_batch", t.max_batch}}},
             {"omega", m.omega},
             {"ramp_power", m.ramp_power}};
  return Json{{"name", m.name},
              {"kind", to_string(m.kind)},
              {"seed", m.seed},
              {"w_c", m.w_c},
              {"metric", to_string(m.metric)},
              {"greedy_width", m.greedy_width},
              {"output_dir", m.output_dir},
              {"epochs", m.plan.epochs},
              {"final_epochs", m.plan.final_epochs},
              {"space", space},
              {"stage1", write_bo(m.plan.stage1)},
              {"stage2", write_stage2(m.plan.stage2)},
              {"stage3", write_bo(m.plan.stage3)},
              {"presets", write_presets(m.plan.presets)},
              {"evaluator", write_evaluator(m.evaluator)}};
}

std::string_view to_string(EvaluatorType type) {
  switch (type) {
    case EvaluatorType::synthetic: return "synthetic";
    case EvaluatorType::builtin_mlp: return "builtin-mlp";
    case EvaluatorType::external: return "external";
  }
  return "?";
}

EvaluatorType parse_evaluator_type(std::string_view text) {
  for (auto t : {EvaluatorType::synthetic, EvaluatorType::builtin_mlp, EvaluatorType::external}) {
    if (text == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown evaluator type '" + std::string(text) + "' (expected synthetic, builtin-mlp or external)");
}

}  // namespace cxs
