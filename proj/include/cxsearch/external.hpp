// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0
//
// Evaluator backed by a child process speaking line-delimited JSON over its
// stdin/stdout:
//
//   -> {"type":"hello","version":1}
//   <- {"type":"hello","version":1,"capabilities":["mlp","cnn",...]}
//   -> {"type":"evaluate","id":N,"config":{...},"epochs":E,"seed":S}
//   <- {"type":"result","id":N,"best_val_acc":A,"t_tr_sec":T,"n_params":P}
//    | {"type":"error","id":N,"reason":"..."}
//
// Ids are strictly increasing. Responses carrying an older id (left over from
// a timed-out request) are skipped; unknown fields are ignored.

#pragma once

#include <chrono>
#include <deque>
#include <stdexcept>
#include <string>
#include <sys/types.h>
#include <vector>

#include "cxsearch/evaluator.hpp"

namespace cxs {

inline constexpr int kProtocolVersion = 1;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExternalSettings {
  /// Program and arguments; argv[0] is resolved through PATH.
  std::vector<std::string> command;
  DatasetDescriptor dataset;
  int epochs = 10;
  std::chrono::milliseconds timeout{std::chrono::minutes(10)};
  std::chrono::milliseconds handshake_timeout{std::chrono::seconds(30)};
};

/// Owns one child process. Spawning and the handshake happen in the
/// constructor, which throws ProtocolError on failure (no evaluation is sent).
/// After a timeout or a crash the child is killed and respawned on the next
/// request.
class ExternalEvaluator final : public Evaluator {
 public:
  explicit ExternalEvaluator(ExternalSettings settings);
  ~ExternalEvaluator() override;

  /// Last lines exchanged with the child, oldest first, prefixed "> " (sent)
  /// or "< " (received).
  std::vector<std::string> transcript() const { return {transcript_.begin(), transcript_.end()}; }
  pid_t pid() const { return pid_; }
  long last_id() const { return next_id_ - 1; }

 protected:
  EvalResult evaluate(const Config& config, std::uint64_t seed) override;

 private:
  enum class ReadStatus { line, timeout, closed };

  void spawn();
  void handshake();
  void shutdown();
  void send(const std::string& line);
  ReadStatus read_line(std::string& line, std::chrono::steady_clock::time_point deadline);
  void note(const std::string& line);
  EvalResult fail(const std::string& reason, bool kill_child);

  ExternalSettings settings_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  long next_id_ = 1;
  std::deque<std::string> transcript_;
};

}  // namespace cxs
