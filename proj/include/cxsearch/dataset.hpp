// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cxs {

/// In-memory classification set; one example per column of `x`.
struct Dataset {
  std::string name;
  Eigen::MatrixXf x;
  std::vector<int> y;
  int num_classes = 0;

  int size() const { return static_cast<int>(y.size()); }
  int features() const { return static_cast<int>(x.rows()); }
  Dataset subset(const std::vector<int>& indices) const;
};

struct DatasetSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Reads a headerless CSV with numeric features and an integer class label in
/// the last column. Features are divided by `scale`.
Dataset load_csv(const std::filesystem::path& path, float scale = 1.0f);

/// Isotropic Gaussian clusters with centres on a sphere of radius `separation`.
Dataset make_blobs(int per_class, int num_classes, int features, double separation, std::uint64_t seed);

/// Stratified shuffle split; test gets the remainder after train and val.
DatasetSplits split(const Dataset& data, double train_fraction, double val_fraction, std::uint64_t seed);

/// The bundled 8x8 handwritten digits (1797 examples, 64 features in [0, 1]).
Dataset load_digits();

}  // namespace cxs
