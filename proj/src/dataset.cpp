// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cxsearch/encoding.hpp"

#ifndef CXSEARCH_DATA_DIR
#define CXSEARCH_DATA_DIR "data"
#endif

namespace cxs {

Dataset Dataset::subset(const std::vector<int>& indices) const {
  Dataset out;
  out.name = name;
  out.num_classes = num_classes;
  out.x.resize(x.rows(), static_cast<Eigen::Index>(indices.size()));
  out.y.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.x.col(static_cast<Eigen::Index>(i)) = x.col(indices[i]);
    out.y.push_back(y[static_cast<std::size_t>(indices[i])]);
  }
  return out;
}

Dataset load_csv(const std::filesystem::path& path, float scale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t width = 0;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      values.push_back(parse_double(cell));
    }
    if (values.size() < 2) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": too few columns");
    if (width == 0) width = values.size();
    if (values.size() != width) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    labels.push_back(static_cast<int>(values.back()));
    std::vector<float> feats(values.begin(), values.end() - 1);
    rows.push_back(std::move(feats));
  }
  if (rows.empty()) throw std::runtime_error("dataset " + path.string() + " is empty");
  Dataset d;
  d.name = path.stem().string();
  d.x.resize(static_cast<Eigen::Index>(width - 1), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i + 1 < width; ++i) d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i] / scale;
  }
  d.y = std::move(labels);
  if (*std::min_element(d.y.begin(), d.y.end()) < 0) throw std::runtime_error("negative class label in " + path.string());
  d.num_classes = *std::max_element(d.y.begin(), d.y.end()) + 1;
  return d;
}

Dataset make_blobs(int per_class, int num_classes, int features, double separation, std::uint64_t seed) {
  if (per_class < 1 || num_classes < 2 || features < 1) throw std::invalid_argument("make_blobs: bad shape");
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  Eigen::MatrixXf centres(features, num_classes);
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < features; ++i) centres(i, c) = normal(rng);
    centres.col(c) *= static_cast<float>(separation) / centres.col(c).norm();
  }
  Dataset d;
  d.name = "blobs";
  d.num_classes = num_classes;
  d.x.resize(features, per_class * num_classes);
  for (int c = 0; c < num_classes; ++c) {
    for (int k = 0; k < per_class; ++k) {
      const int j = c * per_class + k;
      for (int i = 0; i < features; ++i) d.x(i, j) = centres(i, c) + normal(rng);
      d.y.push_back(c);
    }
  }
  return d;
}

DatasetSplits split(const Dataset& data, double train_fraction, double val_fraction, std::uint64_t seed) {
  if (train_fraction <= 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0) {
    throw std::invalid_argument("split fractions must satisfy 0 < train, 0 <= val, train + val <= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(data.num_classes));
  for (int j = 0; j < data.size(); ++j) by_class[static_cast<std::size_t>(data.y[static_cast<std::size_t>(j)])].push_back(j);
  std::vector<int> tr, va, te;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n = static_cast<double>(members.size());
    const auto n_tr = static_cast<std::size_t>(std::lround(n * train_fraction));
    const auto n_va = std::min(members.size() - n_tr, static_cast<std::size_t>(std::lround(n * val_fraction)));
    tr.insert(tr.end(), members.begin(), members.begin() + static_cast<long>(n_tr));
    va.insert(va.end(), members.begin() + static_cast<long>(n_tr), members.begin() + static_cast<long>(n_tr + n_va));
    te.insert(te.end(), members.begin() + static_cast<long>(n_tr + n_va), members.end());
  }
  std::sort(tr.begin(), tr.end());
  std::sort(va.begin(), va.end());
  std::sort(te.begin(), te.end());
  return {data.subset(tr), data.subset(va), data.subset(te)};
}

Dataset load_digits() {
  Dataset d = load_csv(std::filesystem::path(CXSEARCH_DATA_DIR) / "digits.csv", 16.0f);
  d.name = "digits";
  return d;
}

}  // namespace cxs
