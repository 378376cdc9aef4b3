// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

namespace cxs {

enum class LogLevel { debug, info, warning, error };

void set_log_level(LogLevel level);
void log(LogLevel level, std::string_view message);

/// Logs `message` at warning level only the first time `key` is seen.
void warn_once(std::string_view key, std::string_view message);

}  // namespace cxs
