#include "coti/plugin.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "coti/errors.hpp"
#include "json.hpp"

extern char** environ;

namespace coti {

std::string_view to_string(ScorerKind k) noexcept {
  return k == ScorerKind::aesthetic ? "aesthetic" : "concept";
}

ScorerKind scorer_kind_from_string(std::string_view s) {
  if (s == "aesthetic") return ScorerKind::aesthetic;
  if (s == "concept") return ScorerKind::concept_match;
  throw Error(ErrorKind::MalformedReply, fmt::format("unknown scorer kind '{}'", s));
}

namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left < 0 ? 0 : static_cast<int>(left);
}

void set_nonblocking(int fd) {
  const int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

}  // namespace

ChildProcess::ChildProcess(const std::vector<std::string>& command) {
  if (command.empty()) throw Error(ErrorKind::SpawnFailure, "empty plugin command");
  // A plugin that dies mid-request must surface as an error, not kill us.
  std::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0) throw Error(ErrorKind::SpawnFailure, std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw Error(ErrorKind::SpawnFailure, std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) posix_spawn_file_actions_addclose(&actions, fd);

  std::vector<char*> argv;
  argv.reserve(command.size() + 1);
  for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  pid_t pid = -1;
  const int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  if (rc != 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    throw Error(ErrorKind::SpawnFailure, fmt::format("{}: {}", command.front(), std::strerror(rc)));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  set_nonblocking(to_child_);
  set_nonblocking(from_child_);
}

ChildProcess::~ChildProcess() { close_all(); }

ChildProcess::ChildProcess(ChildProcess&& other) noexcept
    : pid_(std::exchange(other.pid_, -1)),
      to_child_(std::exchange(other.to_child_, -1)),
      from_child_(std::exchange(other.from_child_, -1)),
      buffer_(std::move(other.buffer_)) {}

ChildProcess& ChildProcess::operator=(ChildProcess&& other) noexcept {
  if (this != &other) {
    close_all();
    pid_ = std::exchange(other.pid_, -1);
    to_child_ = std::exchange(other.to_child_, -1);
    from_child_ = std::exchange(other.from_child_, -1);
    buffer_ = std::move(other.buffer_);
  }
  return *this;
}

void ChildProcess::close_all() noexcept {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // Closing stdin asks the plugin to exit; give it a moment, then kill.
    for (int i = 0; i < 20; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      usleep(5000);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

void ChildProcess::write_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  std::size_t written = 0;
  const auto deadline = Clock::now() + std::chrono::seconds(30);
  while (written < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + written, data.size() - written);
    if (n > 0) {
      written += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
      throw Error(ErrorKind::MalformedReply, fmt::format("plugin stdin closed: {}", std::strerror(errno)));
    }
    pollfd pfd{to_child_, POLLOUT, 0};
    if (poll(&pfd, 1, remaining_ms(deadline)) == 0) throw Error(ErrorKind::Timeout, "plugin is not reading");
  }
}

std::string ChildProcess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  while (true) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, remaining_ms(deadline));
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) throw Error(ErrorKind::Timeout, fmt::format("no reply within {} ms", timeout.count()));
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n > 0) {
      buffer_.append(chunk, static_cast<std::size_t>(n));
    } else if (n == 0) {
      throw Error(ErrorKind::MalformedReply, "plugin closed its output");
    } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
      throw Error(ErrorKind::MalformedReply, std::strerror(errno));
    }
  }
}

PluginHandle::PluginHandle(ChildProcess process, int protocol_version, std::set<ScorerKind> kinds,
                           std::chrono::milliseconds timeout)
    : process_(std::move(process)), protocol_version_(protocol_version), kinds_(std::move(kinds)), timeout_(timeout) {}

std::string PluginHandle::exchange(std::string_view request_line) {
  process_.write_line(request_line);
  return process_.read_line(timeout_);
}

std::string encode_hello_request() {
  nlohmann::ordered_json j;
  j["op"] = "hello";
  j["version"] = kPluginProtocolVersion;
  return j.dump();
}

std::string encode_score_request(ScorerKind kind, std::span<const Sample> samples) {
  nlohmann::ordered_json j;
  j["op"] = "score";
  j["kind"] = std::string(to_string(kind));
  auto ids = nlohmann::ordered_json::array();
  auto features = nlohmann::ordered_json::array();
  for (const auto& s : samples) {
    ids.push_back(s.id);
    features.push_back(s.features);
  }
  j["ids"] = std::move(ids);
  j["features"] = std::move(features);
  return j.dump();
}

namespace {

nlohmann::json parse_reply(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedReply, e.what());
  }
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) {
    throw Error(ErrorKind::MalformedReply, fmt::format("reply without op: {}", line));
  }
  if (j["op"] == "error") {
    const auto msg = j.value("message", std::string("unspecified plugin error"));
    throw Error(ErrorKind::PluginError, msg);
  }
  return j;
}

}  // namespace

PluginHandle handshake(const std::vector<std::string>& command, std::chrono::milliseconds timeout) {
  ChildProcess process(command);
  process.write_line(encode_hello_request());
  const auto reply = parse_reply(process.read_line(timeout));
  if (reply["op"] != "hello") throw Error(ErrorKind::MalformedReply, "expected hello reply");
  const auto version = reply.find("version");
  if (version == reply.end() || !version->is_number_integer()) {
    throw Error(ErrorKind::MalformedReply, "hello reply without integer version");
  }
  if (version->get<int>() != kPluginProtocolVersion) {
    throw Error(ErrorKind::VersionMismatch,
                fmt::format("plugin speaks v{}, engine v{}", version->get<int>(), kPluginProtocolVersion));
  }
  const auto kinds_it = reply.find("kinds");
  if (kinds_it == reply.end() || !kinds_it->is_array()) throw Error(ErrorKind::MalformedReply, "missing kinds");
  std::set<ScorerKind> kinds;
  for (const auto& k : *kinds_it) {
    if (!k.is_string()) throw Error(ErrorKind::MalformedReply, "kinds must be strings");
    kinds.insert(scorer_kind_from_string(k.get<std::string>()));
  }
  return PluginHandle(std::move(process), kPluginProtocolVersion, std::move(kinds), timeout);
}

std::vector<double> decode_score_reply(std::string_view line, std::size_t expected) {
  const auto reply = parse_reply(line);
  if (reply["op"] != "score") throw Error(ErrorKind::MalformedReply, "expected score reply");
  const auto scores = reply.find("scores");
  if (scores == reply.end() || !scores->is_array()) throw Error(ErrorKind::MalformedReply, "missing scores");
  if (scores->size() != expected) {
    throw Error(ErrorKind::LengthMismatch, fmt::format("{} scores for {} samples", scores->size(), expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : *scores) {
    if (!v.is_number()) throw Error(ErrorKind::MalformedReply, "non-numeric score");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<Score> score_batch(PluginHandle& handle, ScorerKind kind, std::span<const Sample> samples) {
  if (!handle.serves(kind)) {
    throw Error(ErrorKind::InvalidConfig, fmt::format("plugin does not serve '{}'", to_string(kind)));
  }
  if (samples.empty()) return {};
  for (const auto& s : samples) {
    if (s.features.size() != samples.front().features.size()) {
      throw Error(ErrorKind::DimensionMismatch, "score_batch samples differ in dimension");
    }
  }
  const auto raw = decode_score_reply(handle.exchange(encode_score_request(kind, samples)), samples.size());
  std::vector<Score> out;
  out.reserve(raw.size());
  for (double v : raw) out.push_back(Score::clamped(v));
  return out;
}

PluginScorers::PluginScorers(std::shared_ptr<PluginHandle> handle, BuiltinScorerOptions fallback)
    : handle_(std::move(handle)), fallback_(std::move(fallback)) {}

void PluginScorers::refit(const Pool& training, const Pool& negatives) {
  if (!handle_->serves(ScorerKind::aesthetic) || !handle_->serves(ScorerKind::concept_match)) {
    fallback_.refit(training, negatives);
  }
}

namespace {

std::vector<double> values(const std::vector<Score>& scores) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const auto s : scores) out.push_back(s.value());
  return out;
}

}  // namespace

std::vector<double> PluginScorers::aesthetic_scores(std::span<const Sample> samples) {
  if (handle_->serves(ScorerKind::aesthetic)) return values(score_batch(*handle_, ScorerKind::aesthetic, samples));
  return fallback_.aesthetic_scores(samples);
}

std::vector<double> PluginScorers::concept_scores(std::span<const Sample> samples) {
  if (handle_->serves(ScorerKind::concept_match)) {
    return values(score_batch(*handle_, ScorerKind::concept_match, samples));
  }
  return fallback_.concept_scores(samples);
}

std::vector<std::string> split_command(std::string_view command_line) {
  std::vector<std::string> out;
  std::string current;
  for (char c : command_line) {
    if (c == ' ' || c == '\t') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace coti
