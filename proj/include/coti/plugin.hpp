#pragma once

#include <chrono>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coti/scoring_system.hpp"

namespace coti {

inline constexpr int kPluginProtocolVersion = 1;

enum class ScorerKind { aesthetic, concept_match };

std::string_view to_string(ScorerKind k) noexcept;  // "aesthetic" / "concept"
ScorerKind scorer_kind_from_string(std::string_view s);

// A spawned child process with its stdin/stdout wired to pipes.
class ChildProcess {
 public:
  explicit ChildProcess(const std::vector<std::string>& command);
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ChildProcess(ChildProcess&& other) noexcept;
  ChildProcess& operator=(ChildProcess&& other) noexcept;

  void write_line(std::string_view line);
  // Reads one newline-terminated line. Throws Timeout if none arrives in
  // time, MalformedReply if the child closes its stdout first.
  std::string read_line(std::chrono::milliseconds timeout);

  int pid() const noexcept { return pid_; }

 private:
  void close_all() noexcept;

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// Handle to a scorer plugin that completed the version handshake.
class PluginHandle {
 public:
  PluginHandle(ChildProcess process, int protocol_version, std::set<ScorerKind> kinds,
               std::chrono::milliseconds timeout);

  int protocol_version() const noexcept { return protocol_version_; }
  const std::set<ScorerKind>& declared_kinds() const noexcept { return kinds_; }
  std::chrono::milliseconds request_timeout() const noexcept { return timeout_; }
  bool serves(ScorerKind k) const { return kinds_.contains(k); }

  // One request/response exchange on the wire.
  std::string exchange(std::string_view request_line);

 private:
  ChildProcess process_;
  int protocol_version_;
  std::set<ScorerKind> kinds_;
  std::chrono::milliseconds timeout_;
};

// Sends {"op":"hello","version":1} and validates the reply.
PluginHandle handshake(const std::vector<std::string>& command, std::chrono::milliseconds timeout);

// Request and reply encodings of protocol v1, exposed for fixtures.
std::string encode_hello_request();
std::string encode_score_request(ScorerKind kind, std::span<const Sample> samples);
std::vector<double> decode_score_reply(std::string_view line, std::size_t expected);

// Scores clamped into [0, 10], in input order.
std::vector<Score> score_batch(PluginHandle& handle, ScorerKind kind, std::span<const Sample> samples);

// Kinds the plugin declares are hosted remotely; the rest fall back to
// the built-in scorers, which are still refit every cycle.
class PluginScorers final : public ScoringSystem {
 public:
  PluginScorers(std::shared_ptr<PluginHandle> handle, BuiltinScorerOptions fallback = {});

  void refit(const Pool& training, const Pool& negatives) override;
  std::vector<double> aesthetic_scores(std::span<const Sample> samples) override;
  std::vector<double> concept_scores(std::span<const Sample> samples) override;

 private:
  std::shared_ptr<PluginHandle> handle_;
  BuiltinScorers fallback_;
};

// Splits a "plugin:<command line>" scorer spec on whitespace.
std::vector<std::string> split_command(std::string_view command_line);

}  // namespace coti
