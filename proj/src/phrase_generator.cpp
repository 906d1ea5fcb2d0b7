// Copyright 2026 The normadd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "normadd/phrase_generator.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <mutex>

#include "httplib.h"
#include "normadd/errors.hpp"

namespace normadd {

std::vector<std::string> split_lines(std::string_view body) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    auto line = body.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    start = end + 1;
  }
  return out;
}

HttpPhraseGenerator::HttpPhraseGenerator(std::string url,
                                         std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgument("phrase generator url needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = url;
    path_ = "/";
  } else {
    scheme_host_port_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
}

std::vector<std::string> HttpPhraseGenerator::generate(
    std::string_view instruction) const {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  auto res = client.Post(path_, std::string(instruction), "text/plain; charset=utf-8");
  if (!res) {
    throw EncoderError("phrase generator request failed: " +
                       httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw EncoderError("phrase generator returned HTTP " +
                       std::to_string(res->status));
  }
  return split_lines(res->body);
}

SubprocessPhraseGenerator::SubprocessPhraseGenerator(std::string command,
                                                     std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {}

namespace {

struct Fd {
  int fd = -1;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

}  // namespace

std::vector<std::string> SubprocessPhraseGenerator::generate(
    std::string_view instruction) const {
  // SIGPIPE disposition is process-wide, so calls are serialized.
  static std::mutex mu;
  std::lock_guard lock(mu);
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw EncoderError("pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw EncoderError("pipe failed");
  }
  Fd child_in{in_pipe[1]};
  Fd child_out{out_pipe[0]};
  Fd their_in{in_pipe[0]};
  Fd their_out{out_pipe[1]};

  const pid_t pid = ::fork();
  if (pid < 0) throw EncoderError("fork failed");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  their_in.reset();
  their_out.reset();

  // The child may exit without reading stdin; don't die on SIGPIPE.
  struct sigaction ignore {};
  struct sigaction previous {};
  ignore.sa_handler = SIG_IGN;
  ::sigaction(SIGPIPE, &ignore, &previous);
  std::size_t written = 0;
  while (written < instruction.size()) {
    const auto n = ::write(child_in.fd, instruction.data() + written,
                           instruction.size() - written);
    if (n <= 0) break;
    written += static_cast<std::size_t>(n);
  }
  child_in.reset();
  ::sigaction(SIGPIPE, &previous, nullptr);

  std::string output;
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  bool timed_out = false;
  char buf[4096];
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd p{child_out.fd, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) {
      timed_out = r == 0;
      break;
    }
    const auto n = ::read(child_out.fd, buf, sizeof(buf));
    if (n <= 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  if (timed_out) ::kill(pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timed_out) throw EncoderError("phrase generator command timed out");
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw EncoderError("phrase generator command failed with status " +
                       std::to_string(status));
  }
  return split_lines(output);
}

}  // namespace normadd
