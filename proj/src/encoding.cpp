// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/encoding.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <stdexcept>
#include <vector>

namespace cxs {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> items;
  s = trim(s);
  if (s.empty()) return items;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    items.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

int parse_int(std::string_view text) {
  text = trim(text);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues to_key_values(const Config& c) {
  KeyValues kv;
  kv.emplace_back("kind", std::string(to_string(c.kind())));
  if (c.is_cnn()) {
    const auto& a = c.cnn();
    kv.emplace_back("cnn.channels", join(a.channels, [](int v) { return std::to_string(v); }));
    kv.emplace_back("cnn.downsampling", join(a.downsampling, [](Downsample d) { return std::string(to_string(d)); }));
    kv.emplace_back("cnn.bn_fraction", to_string(a.bn_fraction));
    kv.emplace_back("cnn.dropout_fraction", to_string(a.dropout_fraction));
    kv.emplace_back("cnn.input_drop_prob", format_double(a.input_drop_prob));
    kv.emplace_back("cnn.hidden_drop_prob", format_double(a.hidden_drop_prob));
    kv.emplace_back("cnn.shortcuts", std::string(to_string(a.shortcuts)));
  } else {
    const auto& a = c.mlp();
    kv.emplace_back("mlp.hidden_nodes", join(a.hidden_nodes, [](int v) { return std::to_string(v); }));
    kv.emplace_back("mlp.drop_prob", format_double(a.drop_prob));
  }
  kv.emplace_back("train.eta", format_double(c.training.eta));
  kv.emplace_back("train.lambda", format_double(c.training.lambda));
  kv.emplace_back("train.batch_size", std::to_string(c.training.batch_size));
  return kv;
}

class FieldReader {
 public:
  explicit FieldReader(std::map<std::string, std::string, std::less<>> fields) : fields_(std::move(fields)) {}

  std::string_view take(std::string_view key) {
    auto it = fields_.find(key);
    if (it == fields_.end()) throw std::invalid_argument("config encoding is missing key '" + std::string(key) + "'");
    taken_.emplace_back(it->first);
    return it->second;
  }

  void finish() const {
    if (taken_.size() == fields_.size()) return;
    for (const auto& [key, value] : fields_) {
      if (std::find(taken_.begin(), taken_.end(), key) == taken_.end()) {
        throw std::invalid_argument("config encoding has unexpected key '" + key + "'");
      }
    }
  }

 private:
  std::map<std::string, std::string, std::less<>> fields_;
  std::vector<std::string> taken_;
};

Config from_reader(FieldReader& r) {
  Config c;
  const ArchKind kind = parse_arch_kind(trim(r.take("kind")));
  if (kind == ArchKind::cnn) {
    CnnArch a;
    for (auto item : split_list(r.take("cnn.channels"))) a.channels.push_back(parse_int(item));
    for (auto item : split_list(r.take("cnn.downsampling"))) a.downsampling.push_back(parse_downsample(item));
    a.bn_fraction = parse_layer_fraction(trim(r.take("cnn.bn_fraction")));
    a.dropout_fraction = parse_layer_fraction(trim(r.take("cnn.dropout_fraction")));
    a.input_drop_prob = parse_double(r.take("cnn.input_drop_prob"));
    a.hidden_drop_prob = parse_double(r.take("cnn.hidden_drop_prob"));
    a.shortcuts = parse_shortcut_policy(trim(r.take("cnn.shortcuts")));
    c.arch = std::move(a);
  } else {
    MlpArch a;
    for (auto item : split_list(r.take("mlp.hidden_nodes"))) a.hidden_nodes.push_back(parse_int(item));
    a.drop_prob = parse_double(r.take("mlp.drop_prob"));
    c.arch = std::move(a);
  }
  c.training.eta = parse_double(r.take("train.eta"));
  c.training.lambda = parse_double(r.take("train.lambda"));
  c.training.batch_size = parse_int(r.take("train.batch_size"));
  r.finish();
  return c;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("failed to format double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected a real number, got '" + std::string(text) + "'");
  }
  return value;
}

std::string encode(const Config& config) {
  std::string out;
  for (const auto& [key, value] : to_key_values(config)) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

Config decode(std::string_view text) {
  std::map<std::string, std::string, std::less<>> fields;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config encoding line " + std::to_string(line_no) + " has no '='");
    }
    std::string key(trim(line.substr(0, eq)));
    if (!fields.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw std::invalid_argument("config encoding repeats key '" + key + "'");
    }
  }
  FieldReader reader(std::move(fields));
  return from_reader(reader);
}

nlohmann::json to_flat_json(const Config& c) {
  nlohmann::json j = nlohmann::json::object();
  j["kind"] = std::string(to_string(c.kind()));
  if (c.is_cnn()) {
    const auto& a = c.cnn();
    j["cnn.channels"] = a.channels;
    auto ds = nlohmann::json::array();
    for (auto d : a.downsampling) ds.push_back(std::string(to_string(d)));
    j["cnn.downsampling"] = ds;
    j["cnn.bn_fraction"] = to_string(a.bn_fraction);
    j["cnn.dropout_fraction"] = to_string(a.dropout_fraction);
    j["cnn.input_drop_prob"] = a.input_drop_prob;
    j["cnn.hidden_drop_prob"] = a.hidden_drop_prob;
    j["cnn.shortcuts"] = std::string(to_string(a.shortcuts));
  } else {
    j["mlp.hidden_nodes"] = c.mlp().hidden_nodes;
    j["mlp.drop_prob"] = c.mlp().drop_prob;
  }
  j["train.eta"] = c.training.eta;
  j["train.lambda"] = c.training.lambda;
  j["train.batch_size"] = c.training.batch_size;
  return j;
}

Config from_flat_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  auto num = [&](const char* key) -> double {
    const auto& v = j.at(key);
    if (!v.is_number()) throw std::invalid_argument(std::string("config key '") + key + "' must be a number");
    return v.get<double>();
  };
  auto str = [&](const char* key) -> std::string {
    const auto& v = j.at(key);
    if (!v.is_string()) throw std::invalid_argument(std::string("config key '") + key + "' must be a string");
    return v.get<std::string>();
  };
  std::size_t expected = 4;
  Config c;
  try {
    if (parse_arch_kind(str("kind")) == ArchKind::cnn) {
      CnnArch a;
      a.channels = j.at("cnn.channels").get<std::vector<int>>();
      for (const auto& d : j.at("cnn.downsampling")) a.downsampling.push_back(parse_downsample(d.get<std::string>()));
      a.bn_fraction = parse_layer_fraction(str("cnn.bn_fraction"));
      a.dropout_fraction = parse_layer_fraction(str("cnn.dropout_fraction"));
      a.input_drop_prob = num("cnn.input_drop_prob");
      a.hidden_drop_prob = num("cnn.hidden_drop_prob");
      a.shortcuts = parse_shortcut_policy(str("cnn.shortcuts"));
      c.arch = std::move(a);
      expected += 7;
    } else {
      MlpArch a;
      a.hidden_nodes = j.at("mlp.hidden_nodes").get<std::vector<int>>();
      a.drop_prob = num("mlp.drop_prob");
      c.arch = std::move(a);
      expected += 2;
    }
    c.training.eta = num("train.eta");
    c.training.lambda = num("train.lambda");
    const auto& batch = j.at("train.batch_size");
    if (!batch.is_number_integer()) throw std::invalid_argument("config key 'train.batch_size' must be an integer");
    c.training.batch_size = batch.get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed config object: ") + e.what());
  }
  if (j.size() != expected) throw std::invalid_argument("config object has unexpected keys");
  return c;
}

}  // namespace cxs
