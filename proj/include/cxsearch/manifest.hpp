// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run manifest: a JSON document declaring the problem kind, space overrides,
// objective, BO settings, Stage-2 grids, presets, evaluator and seed. Every
// key is optional except "kind"; unknown keys are rejected. serialize() emits
// the fully expanded form, so parse -> serialize -> parse is a fixed point.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cxsearch/pipeline.hpp"
#include "cxsearch/synthetic.hpp"
#include "cxsearch/trace.hpp"

namespace cxs {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EvaluatorType { synthetic, builtin_mlp, external };

struct BuiltinDataSpec {
  /// "digits", "blobs", or a CSV path (label in the last column).
  std::string source = "digits";
  double scale = 1.0;
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  std::uint64_t split_seed = 0;
  int blob_per_class = 200;
  int blob_classes = 3;
  int blob_features = 8;
  double blob_separation = 4.0;
  std::uint64_t blob_seed = 0;

  bool operator==(const BuiltinDataSpec&) const = default;
};

struct EvaluatorSpec {
  EvaluatorType type = EvaluatorType::synthetic;
  SyntheticSettings synthetic;
  BuiltinDataSpec data;
  std::vector<std::string> command;
  double timeout_sec = 600.0;
  /// Dataset declared for synthetic and external evaluators; synthetic falls
  /// back to a default per kind.
  std::optional<DatasetDescriptor> dataset;

  bool operator==(const EvaluatorSpec&) const = default;
};

struct RunManifest {
  std::string name = "run";
  ArchKind kind = ArchKind::mlp;
  std::uint64_t seed = 0;
  std::vector<double> w_c{0.0};
  ComplexityMetric metric = ComplexityMetric::t_tr;
  int greedy_width = 1;
  /// Empty means the default output root.
  std::string output_dir;
  double omega = 3.0;
  double ramp_power = 1.0;
  StagePlan plan;
  EvaluatorSpec evaluator;

  bool operator==(const RunManifest&) const = default;
};

/// Throws ManifestError naming the offending key.
RunManifest parse_manifest(const Json& doc);
RunManifest load_manifest(const std::filesystem::path& path);
Json serialize(const RunManifest& manifest);

std::string_view to_string(EvaluatorType type);
EvaluatorType parse_evaluator_type(std::string_view text);

Json to_json(const DatasetDescriptor& d);
DatasetDescriptor dataset_from_json(const Json& j);

}  // namespace cxs
