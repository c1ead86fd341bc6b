#include "fclloop/subprocess.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "fclloop/error.hpp"

extern char** environ;

namespace fclloop {

namespace {

constexpr std::size_t kStderrKeep = 64 * 1024;

int millis_until(std::chrono::steady_clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

void ignore_sigpipe_once() {
  static const bool done = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

}  // namespace

std::string shell_quote(std::string_view path) {
  std::string out = "'";
  for (char c : path) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

Subprocess::Subprocess(const std::string& command, const std::string& working_dir) {
  ignore_sigpipe_once();
  int in_pipe[2];
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw SpawnFailed(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw SpawnFailed(std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw SpawnFailed(std::string("pipe: ") + std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], 0);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], 1);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], 2);
  if (!working_dir.empty()) posix_spawn_file_actions_addchdir_np(&actions, working_dir.c_str());
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  std::vector<std::string> env_storage;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    if (std::strncmp(*e, "PYTHONUNBUFFERED=", 17) != 0) env_storage.emplace_back(*e);
  }
  env_storage.emplace_back("PYTHONUNBUFFERED=1");
  std::vector<char*> envp;
  for (auto& s : env_storage) envp.push_back(s.data());
  envp.push_back(nullptr);

  std::string shell = "/bin/sh";
  std::string flag = "-c";
  std::string cmd = command;
  char* argv[] = {shell.data(), flag.data(), cmd.data(), nullptr};
  int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, &attr, argv, envp.data());
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);
    pid_ = -1;
    throw SpawnFailed("cannot start '" + command + "': " + std::strerror(rc));
  }
  stdin_fd_ = in_pipe[1];
  stdout_fd_ = out_pipe[0];
  stderr_fd_ = err_pipe[0];
  set_nonblocking(stdin_fd_);
  set_nonblocking(stdout_fd_);
  set_nonblocking(stderr_fd_);
}

Subprocess::~Subprocess() { terminate(std::chrono::milliseconds(0)); }

void Subprocess::close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

void Subprocess::drain_stderr() {
  if (stderr_fd_ < 0) return;
  char buf[4096];
  for (;;) {
    ssize_t n = ::read(stderr_fd_, buf, sizeof buf);
    if (n > 0) {
      stderr_buffer_.append(buf, static_cast<std::size_t>(n));
      if (stderr_buffer_.size() > kStderrKeep) stderr_buffer_.erase(0, stderr_buffer_.size() - kStderrKeep);
      continue;
    }
    if (n == 0) close_fd(stderr_fd_);
    if (n < 0 && errno == EINTR) continue;
    return;
  }
}

bool Subprocess::write_line(std::string_view line, std::chrono::steady_clock::time_point deadline) {
  if (stdin_fd_ < 0) return false;
  std::string data(line);
  data += '\n';
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::write(stdin_fd_, data.data() + done, data.size() - done);
    if (n > 0) {
      done += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && errno == EAGAIN) {
      pollfd p{stdin_fd_, POLLOUT, 0};
      int wait = millis_until(deadline);
      if (wait == 0 || ::poll(&p, 1, wait) <= 0) return false;
      if ((p.revents & (POLLERR | POLLHUP)) != 0) return false;
      continue;
    }
    return false;
  }
  return true;
}

Subprocess::ReadStatus Subprocess::read_line(std::string& line, std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    if (auto nl = stdout_buffer_.find('\n'); nl != std::string::npos) {
      line = stdout_buffer_.substr(0, nl);
      stdout_buffer_.erase(0, nl + 1);
      return ReadStatus::Line;
    }
    if (stdout_fd_ < 0) {
      drain_stderr();
      return ReadStatus::Eof;
    }
    pollfd fds[2] = {{stdout_fd_, POLLIN, 0}, {stderr_fd_, POLLIN, 0}};
    int wait = millis_until(deadline);
    int rc = ::poll(fds, stderr_fd_ >= 0 ? 2 : 1, wait);
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) {
      drain_stderr();
      return ReadStatus::Timeout;
    }
    if (stderr_fd_ >= 0 && (fds[1].revents & (POLLIN | POLLHUP)) != 0) drain_stderr();
    if ((fds[0].revents & (POLLIN | POLLHUP | POLLERR)) != 0) {
      char buf[4096];
      ssize_t n = ::read(stdout_fd_, buf, sizeof buf);
      if (n > 0) {
        stdout_buffer_.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
        close_fd(stdout_fd_);
      }
    }
  }
}

const std::string& Subprocess::stderr_text() {
  drain_stderr();
  return stderr_buffer_;
}

int Subprocess::wait_for_exit(std::chrono::milliseconds grace) {
  if (pid_ < 0) return exit_status_;
  if (exited_) return exit_status_;
  auto deadline = std::chrono::steady_clock::now() + grace;
  for (;;) {
    int status = 0;
    pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      exited_ = true;
      exit_status_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
      return exit_status_;
    }
    if (r < 0 && errno != EINTR) {
      exited_ = true;
      return exit_status_;
    }
    if (std::chrono::steady_clock::now() >= deadline) return -1;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

void Subprocess::terminate(std::chrono::milliseconds grace) {
  if (pid_ < 0) return;
  close_fd(stdin_fd_);
  if (wait_for_exit(grace) < 0 && !exited_) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    wait_for_exit(std::chrono::milliseconds(1000));
  } else {
    // Reap leftovers of the group, e.g. children the shell started.
    ::kill(-pid_, SIGKILL);
  }
  drain_stderr();
  close_fd(stdout_fd_);
  close_fd(stderr_fd_);
  pid_ = -1;
}

}  // namespace fclloop
