#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>

#include "bpt/error.hpp"
#include "bpt/predictor.hpp"

extern char** environ;

namespace bpt {

namespace {

using Kind = PredictorError::Kind;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace

ExternalPredictor::ExternalPredictor(std::string command, double timeout_s)
    : command_(std::move(command)), timeout_s_(timeout_s) {
  if (!(timeout_s_ > 0.0)) throw ConfigError("predictor timeout must be positive");
  ignore_sigpipe();
  start("");
}

ExternalPredictor::~ExternalPredictor() { stop(); }

void ExternalPredictor::start(const std::string& scenario_id) {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw PredictorError(Kind::kLaunchFailed, scenario_id, std::strerror(errno));
  }
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw PredictorError(Kind::kLaunchFailed, scenario_id, std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  const std::string script = "exec " + command_;
  const char* argv[] = {"/bin/sh", "-c", script.c_str(), nullptr};
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char**>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw PredictorError(Kind::kLaunchFailed, scenario_id, std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();

  try {
    write_line(protocol::hello().dump(), scenario_id);
    const std::string reply = read_line(scenario_id);
    const auto j = nlohmann::json::parse(reply, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("ready", false) != true) {
      throw PredictorError(Kind::kLaunchFailed, scenario_id, "bad handshake reply: " + reply);
    }
    if (j.contains("name") && j["name"].is_string()) name_ = j["name"].get<std::string>();
  } catch (const PredictorError& e) {
    stop();
    if (e.kind() == Kind::kLaunchFailed) throw;
    throw PredictorError(Kind::kLaunchFailed, scenario_id,
                         "'" + command_ + "' did not complete the handshake (" + e.what() + ")");
  }
}

void ExternalPredictor::stop() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    // Give a well-behaved adapter a moment to exit on EOF before killing it.
    for (int i = 0; i < 20; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(5000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
}

void ExternalPredictor::write_line(const std::string& line, const std::string& scenario_id) {
  std::string data = line + "\n";
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    const ssize_t n = ::write(to_child_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PredictorError(Kind::kCrashed, scenario_id, "write failed: " + std::string(std::strerror(errno)));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

std::string ExternalPredictor::read_line(const std::string& scenario_id) {
  using Clock = std::chrono::steady_clock;
  const auto deadline = Clock::now() + std::chrono::duration<double>(timeout_s_);
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) {
      throw PredictorError(Kind::kTimeout, scenario_id,
                           "no response within " + std::to_string(timeout_s_) + " s");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw PredictorError(Kind::kCrashed, scenario_id, std::strerror(errno));
    }
    if (rc == 0) continue;
    char chunk[65536];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PredictorError(Kind::kCrashed, scenario_id, std::strerror(errno));
    }
    if (n == 0) throw PredictorError(Kind::kCrashed, scenario_id, "predictor process exited");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

PredictionSet ExternalPredictor::do_predict(const PredictionRequest& request) {
  if (pid_ <= 0) start(request.scenario_id);
  const std::string id = request.scenario_id + "#" + std::to_string(next_id_++);
  try {
    write_line(protocol::encode_request(request, id).dump(), request.scenario_id);
    const std::string line = read_line(request.scenario_id);
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw PredictorError(Kind::kMalformedOutput, request.scenario_id, "response is not valid JSON");
    }
    return protocol::decode_response(j, id, request.k, request.horizon, request.scenario_id);
  } catch (const PredictorError& e) {
    // Crashed or hung processes are restarted on the next call; a malformed
    // reply leaves the stream in sync, so the process is kept.
    if (e.kind() != Kind::kMalformedOutput) stop();
    throw;
  }
}

}  // namespace bpt
