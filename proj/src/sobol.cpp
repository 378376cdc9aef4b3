// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/sobol.hpp"

#include <bit>
#include <random>
#include <string>

namespace cxs {
namespace {

struct DirectionRow {
  int degree;
  std::uint32_t coefficients;
  std::uint32_t m[10];
};

constexpr DirectionRow kRows[] = {
#include "sobol_directions.inc"
};

constexpr int kTableDimensions = 1 + static_cast<int>(sizeof(kRows) / sizeof(kRows[0]));

std::vector<std::uint32_t> direction_numbers(int dim) {
  constexpr int bits = SobolSequence::kBits;
  std::vector<std::uint32_t> v(bits);
  if (dim == 0) {
    for (int k = 0; k < bits; ++k) v[k] = std::uint32_t{1} << (bits - 1 - k);
    return v;
  }
  const auto& row = kRows[dim - 1];
  const int s = row.degree;
  for (int k = 0; k < s && k < bits; ++k) v[k] = row.m[k] << (bits - 1 - k);
  for (int k = s; k < bits; ++k) {
    std::uint32_t value = v[k - s] ^ (v[k - s] >> s);
    for (int i = 1; i < s; ++i) {
      if ((row.coefficients >> (s - 1 - i)) & 1u) value ^= v[k - i];
    }
    v[k] = value;
  }
  return v;
}

}  // namespace

int SobolSequence::max_dimension() { return kTableDimensions; }

SobolSequence::SobolSequence(int dimension, std::uint64_t shift_seed)
    : dimension_(dimension), shift_(dimension, 0), state_(dimension, 0), shifted_(dimension, 0) {
  if (dimension < 1) throw std::invalid_argument("Sobol dimension must be at least 1");
  if (dimension > kTableDimensions) {
    throw SobolDimensionError("Sobol dimension " + std::to_string(dimension) + " exceeds the direction-number table (" +
                              std::to_string(kTableDimensions) + ")");
  }
  directions_.reserve(dimension);
  for (int d = 0; d < dimension; ++d) directions_.push_back(direction_numbers(d));
  if (shift_seed != 0) {
    std::mt19937_64 rng(shift_seed);
    for (auto& s : shift_) s = static_cast<std::uint32_t>(rng() >> 32);
  }
}

const std::vector<std::uint32_t>& SobolSequence::next_integers() {
  // Gray-code update: flip the direction number of the lowest zero bit of the
  // previous index. Starting from index 0 skips the origin.
  const int c = std::countr_one(index_);
  if (c >= kBits) throw std::overflow_error("Sobol sequence exhausted");
  for (int d = 0; d < dimension_; ++d) {
    state_[d] ^= directions_[d][c];
    shifted_[d] = state_[d] ^ shift_[d];
  }
  ++index_;
  return shifted_;
}

std::vector<double> SobolSequence::next() {
  const auto& ints = next_integers();
  std::vector<double> point(dimension_);
  for (int d = 0; d < dimension_; ++d) point[d] = static_cast<double>(ints[d]) * 0x1p-32;
  return point;
}

}  // namespace cxs
