#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <sys/types.h>

namespace fclloop {

/// Child process running `/bin/sh -c <command>` with piped stdin, stdout and
/// stderr. The child gets its own process group so the whole tree can be
/// killed. Not copyable; destruction terminates the child.
class Subprocess {
 public:
  enum class ReadStatus { Line, Timeout, Eof };

  /// Throws SpawnFailed.
  /// Runs `/bin/sh -c command`, optionally inside `working_dir`.
  explicit Subprocess(const std::string& command, const std::string& working_dir = {});
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// False if the child stopped reading (closed pipe) or the deadline passed.
  bool write_line(std::string_view line, std::chrono::steady_clock::time_point deadline);

  /// Reads up to the next '\n' (not included in `line`).
  ReadStatus read_line(std::string& line, std::chrono::steady_clock::time_point deadline);

  /// Everything the child wrote to stderr so far, tail-truncated.
  const std::string& stderr_text();

  /// Waits for exit up to `grace`; returns the exit status or -1 if still running.
  int wait_for_exit(std::chrono::milliseconds grace);

  /// Closes stdin, waits up to `grace`, then kills the process group.
  void terminate(std::chrono::milliseconds grace);

  [[nodiscard]] pid_t pid() const { return pid_; }

 private:
  void drain_stderr();
  void close_fd(int& fd);

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int stderr_fd_ = -1;
  std::string stdout_buffer_;
  std::string stderr_buffer_;
  bool exited_ = false;
  int exit_status_ = -1;
};

/// Wraps `path` in single quotes for /bin/sh.
std::string shell_quote(std::string_view path);

}  // namespace fclloop
