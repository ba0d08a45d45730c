#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <mutex>

#include "llmize/cli.hpp"

namespace llmize::cli {

namespace {

// Owns a pipe end; closes on scope exit.
class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

std::string run_once(const std::vector<std::string>& argv, const std::string& input) {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  Fd in_read(in_pipe[0]), in_write(in_pipe[1]);
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  Fd out_read(out_pipe[0]), out_write(out_pipe[1]);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_read.get(), STDIN_FILENO);
    ::dup2(out_write.get(), STDOUT_FILENO);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  in_read.reset();
  out_write.reset();

  // Solutions are short; a single write never fills the pipe buffer.
  const auto* p = input.data();
  std::size_t left = input.size();
  while (left > 0) {
    const auto n = ::write(in_write.get(), p, left);
    if (n <= 0) break;
    p += n;
    left -= static_cast<std::size_t>(n);
  }
  in_write.reset();

  std::string output;
  char buf[4096];
  while (true) {
    const auto n = ::read(out_read.get(), buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw std::runtime_error("objective command '" + argv.front() + "' exited with status " +
                             std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }
  return output;
}

}  // namespace

Objective external_command_objective(std::vector<std::string> argv, Direction direction) {
  if (argv.empty()) throw ContractViolation("external objective: command must not be empty");
  // A child that exits without reading stdin must not kill us on write.
  static std::once_flag sigpipe_once;
  std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });
  Objective obj;
  obj.direction = direction;
  obj.name = argv.front();
  obj.description = "external command";
  obj.evaluate = [argv = std::move(argv)](const SolutionValue& v) {
    const std::string out = run_once(argv, render_solution(v) + "\n");
    const auto b = out.find_first_not_of(" \t\r\n");
    const auto e = out.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) throw std::runtime_error("objective command printed nothing");
    const std::string_view text(out.data() + b, e - b + 1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
      throw std::runtime_error("objective command printed '" + std::string(text) + "', expected one real number");
    }
    return value;
  };
  return obj;
}

}  // namespace llmize::cli
