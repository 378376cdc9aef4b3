// Copyright 2026 The cxsearch Authors
// SPDX-License-Identifier: Apache-2.0

#include "cxsearch/external.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "cxsearch/encoding.hpp"
#include "cxsearch/log.hpp"

namespace cxs {

namespace {

constexpr std::size_t kTranscriptLines = 16;
constexpr std::size_t kMaxLine = 1 << 20;

using json = nlohmann::json;

Capabilities parse_capabilities(const json& list) {
  if (!list.is_array()) throw ProtocolError("hello reply: capabilities must be an array");
  Capabilities caps;
  for (const auto& item : list) {
    if (!item.is_string()) throw ProtocolError("hello reply: capability entries must be strings");
    const auto s = item.get<std::string>();
    if (s == "cnn") caps.cnn = true;
    else if (s == "mlp") caps.mlp = true;
    else if (s == "ensemble_vote") caps.ensemble_vote = true;
    else if (s == "deterministic") caps.deterministic = true;
  }
  return caps;
}

}  // namespace

ExternalEvaluator::ExternalEvaluator(ExternalSettings settings)
    : Evaluator(EvaluatorContract{"external", {}, settings.dataset, settings.epochs, settings.timeout}),
      settings_(std::move(settings)) {
  if (settings_.command.empty()) throw ProtocolError("external evaluator command is empty");
  contract_.id = "external:" + settings_.command.front();
  std::signal(SIGPIPE, SIG_IGN);
  spawn();
  try {
    handshake();
  } catch (...) {
    shutdown();
    throw;
  }
}

ExternalEvaluator::~ExternalEvaluator() { shutdown(); }

void ExternalEvaluator::spawn() {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0) throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
  }
  std::vector<char*> argv;
  for (auto& a : settings_.command) argv.push_back(a.data());
  argv.push_back(nullptr);
  const pid_t pid = fork();
  if (pid < 0) throw ProtocolError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execvp(argv[0], argv.data());
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  buffer_.clear();
}

void ExternalEvaluator::shutdown() {
  if (to_child_ >= 0) close(to_child_);
  to_child_ = -1;
  if (pid_ > 0) {
    // Closing stdin asks the child to exit; give it a moment before killing.
    int status = 0;
    bool reaped = false;
    for (int i = 0; i < 50 && !reaped; ++i) {
      reaped = waitpid(pid_, &status, WNOHANG) == pid_;
      if (!reaped) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (!reaped) {
      kill(pid_, SIGKILL);
      waitpid(pid_, &status, 0);
    }
  }
  pid_ = -1;
  if (from_child_ >= 0) close(from_child_);
  from_child_ = -1;
}

void ExternalEvaluator::note(const std::string& line) {
  transcript_.push_back(line);
  while (transcript_.size() > kTranscriptLines) transcript_.pop_front();
}

void ExternalEvaluator::send(const std::string& line) {
  note("> " + line);
  const std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("write to evaluator failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

ExternalEvaluator::ReadStatus ExternalEvaluator::read_line(std::string& line,
                                                           std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      note("< " + line);
      return ReadStatus::line;
    }
    if (buffer_.size() > kMaxLine) throw ProtocolError("evaluator sent a line longer than 1 MiB");
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return ReadStatus::timeout;
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) return ReadStatus::timeout;
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) return ReadStatus::closed;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ExternalEvaluator::handshake() {
  send(json{{"type", "hello"}, {"version", kProtocolVersion}}.dump());
  std::string line;
  const auto status = read_line(line, std::chrono::steady_clock::now() + settings_.handshake_timeout);
  if (status == ReadStatus::timeout) throw ProtocolError("no hello reply from evaluator");
  if (status == ReadStatus::closed) throw ProtocolError("evaluator exited during handshake");
  const json reply = json::parse(line, nullptr, false);
  if (reply.is_discarded() || !reply.is_object()) throw ProtocolError("malformed hello reply: " + line);
  if (reply.value("type", "") != "hello") throw ProtocolError("expected hello reply, got: " + line);
  const auto version = reply.find("version");
  if (version == reply.end() || !version->is_number_integer()) throw ProtocolError("hello reply lacks an integer version");
  if (version->get<long>() != kProtocolVersion) {
    throw ProtocolError("protocol version mismatch: engine speaks " + std::to_string(kProtocolVersion) +
                        ", evaluator speaks " + std::to_string(version->get<long>()));
  }
  const auto caps = reply.find("capabilities");
  contract_.capabilities = caps == reply.end() ? Capabilities{} : parse_capabilities(*caps);
}

EvalResult ExternalEvaluator::fail(const std::string& reason, bool kill_child) {
  std::string text = reason + "\ntranscript:";
  for (const auto& l : transcript_) text += "\n  " + l;
  if (kill_child) {
    log(LogLevel::warning, "external evaluator: " + reason + "; restarting the child");
    if (pid_ > 0) kill(pid_, SIGKILL);
    shutdown();
  }
  return EvalResult::failure(text);
}

EvalResult ExternalEvaluator::evaluate(const Config& config, std::uint64_t seed) {
  if (pid_ < 0) {
    try {
      spawn();
      handshake();
    } catch (const ProtocolError& e) {
      shutdown();
      return fail(std::string("respawn failed: ") + e.what(), false);
    }
  }
  const long id = next_id_++;
  json request{{"type", "evaluate"},
               {"id", id},
               {"config", to_flat_json(config)},
               {"epochs", contract_.epochs},
               {"seed", seed}};
  try {
    send(request.dump());
  } catch (const ProtocolError& e) {
    return fail(e.what(), true);
  }
  const auto deadline = std::chrono::steady_clock::now() + contract_.timeout;
  for (;;) {
    std::string line;
    ReadStatus status;
    try {
      status = read_line(line, deadline);
    } catch (const ProtocolError& e) {
      return fail(e.what(), true);
    }
    if (status == ReadStatus::timeout) return fail("timed out waiting for result " + std::to_string(id), true);
    if (status == ReadStatus::closed) return fail("evaluator exited while handling request " + std::to_string(id), true);
    const json reply = json::parse(line, nullptr, false);
    if (reply.is_discarded() || !reply.is_object()) return fail("malformed response", true);
    const auto rid = reply.find("id");
    if (rid == reply.end() || !rid->is_number_integer()) return fail("response without an integer id", true);
    if (rid->get<long>() < id) continue;
    if (rid->get<long>() > id) return fail("response id " + std::to_string(rid->get<long>()) + " from the future", true);
    const std::string type = reply.value("type", "");
    if (type == "error") {
      const auto reason = reply.find("reason");
      return fail("evaluator error: " + (reason != reply.end() && reason->is_string() ? reason->get<std::string>() : "?"),
                  false);
    }
    if (type != "result") return fail("unexpected response type '" + type + "'", true);
    const auto acc = reply.find("best_val_acc");
    const auto t = reply.find("t_tr_sec");
    const auto np = reply.find("n_params");
    if (acc == reply.end() || !acc->is_number() || t == reply.end() || !t->is_number() || np == reply.end() ||
        !np->is_number_integer()) {
      return fail("result lacks best_val_acc, t_tr_sec or integer n_params", false);
    }
    EvalResult r;
    r.best_val_acc = acc->get<double>();
    r.t_tr_sec = t->get<double>();
    r.n_params = np->get<std::int64_t>();
    r.epochs_run = contract_.epochs;
    if (!(r.best_val_acc >= 0.0 && r.best_val_acc <= 1.0)) return fail("best_val_acc outside [0, 1]", false);
    if (!(r.t_tr_sec >= 0.0) || r.n_params < 0) return fail("negative t_tr_sec or n_params", false);
    return r;
  }
}

}  // namespace cxs
