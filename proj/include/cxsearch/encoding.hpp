// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat config encoding. The text form is UTF-8, one `key = value` per line,
// lists comma-separated, keys always emitted in this order:
//
//   kind                  cnn | mlp
//   cnn.channels          conv channel counts, e.g. 50,52,95
//   cnn.downsampling      stride | maxpool per downsample point
//   cnn.bn_fraction       0 | 1/4 | 1/2 | 3/4 | 1
//   cnn.dropout_fraction  0 | 1/4 | 1/2 | 3/4 | 1
//   cnn.input_drop_prob   real
//   cnn.hidden_drop_prob  real
//   cnn.shortcuts         none | every_4th | every_other
//   mlp.hidden_nodes      hidden sizes, empty for no hidden layer
//   mlp.drop_prob         real
//   train.eta             real
//   train.lambda          real
//   train.batch_size      integer
//
// Only the keys of the config's own kind appear. Reals use the shortest
// representation that reads back to the same double, so decode(encode(c))
// reproduces c bit for bit. The JSON form uses the same keys with typed
// values (numbers, arrays, strings).

#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "cxsearch/config.hpp"

namespace cxs {

std::string encode(const Config& config);
/// Throws std::invalid_argument on malformed input or missing/unknown keys.
Config decode(std::string_view text);

nlohmann::json to_flat_json(const Config& config);
Config from_flat_json(const nlohmann::json& object);

/// Shortest decimal form that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace cxs
