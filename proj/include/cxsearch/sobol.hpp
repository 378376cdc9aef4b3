// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cxs {

class SobolDimensionError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Unscrambled Sobol sequence in Gray-code order with Joe-Kuo direction
/// numbers, 32 bits per coordinate. The all-zero first point is skipped, so
/// the first point is (0.5, ..., 0.5).
///
/// A nonzero `shift_seed` applies a random digital shift (XOR of every
/// coordinate with a fixed per-dimension word), which keeps the net structure.
class SobolSequence {
 public:
  static constexpr int kBits = 32;
  static int max_dimension();

  explicit SobolSequence(int dimension, std::uint64_t shift_seed = 0);

  int dimension() const { return dimension_; }

  /// Next point as integers in [0, 2^32).
  const std::vector<std::uint32_t>& next_integers();
  /// Next point in [0, 1)^dimension.
  std::vector<double> next();

 private:
  int dimension_;
  std::uint64_t index_ = 0;
  std::vector<std::vector<std::uint32_t>> directions_;
  std::vector<std::uint32_t> shift_;
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shifted_;
};

}  // namespace cxs
