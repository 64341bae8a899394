#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <sstream>

#include "racetune/targets.hpp"

namespace racetune {

std::optional<double> parse_cost_output(std::string_view output) {
  std::string_view last;
  std::size_t start = 0;
  while (start < output.size()) {
    auto end = output.find('\n', start);
    if (end == std::string_view::npos) end = output.size();
    auto line = output.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) last = line;
    start = end + 1;
  }
  auto stop = last.find_last_not_of(" \t\r");
  if (stop == std::string_view::npos) return std::nullopt;
  last = last.substr(0, stop + 1);
  auto begin = last.find_last_of(" \t");
  auto token = begin == std::string_view::npos ? last : last.substr(begin + 1);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) return std::nullopt;
  return v;
}

ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s) {
  if (argv.empty()) throw std::invalid_argument("run_process: empty command");
  int fds[2];
  if (pipe(fds) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));

  std::vector<char*> cargs;
  for (const auto& a : argv) cargs.push_back(const_cast<char*>(a.c_str()));
  cargs.push_back(nullptr);

  const auto t0 = std::chrono::steady_clock::now();
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(fds[1], STDOUT_FILENO);
    close(fds[0]);
    close(fds[1]);
    execvp(cargs[0], cargs.data());
    _exit(127);
  }
  setpgid(pid, pid);
  close(fds[1]);

  ProcessResult result;
  char buf[4096];
  const auto deadline = t0 + std::chrono::duration<double>(timeout_s);
  while (true) {
    int wait_ms = -1;
    if (timeout_s > 0) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
      if (left <= 0) {
        result.timed_out = true;
        break;
      }
      wait_ms = static_cast<int>(left);
    }
    pollfd pfd{fds[0], POLLIN, 0};
    const int ready = poll(&pfd, 1, wait_ms);
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) continue;  // re-checks the deadline
    const auto got = read(fds[0], buf, sizeof buf);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) break;
    result.stdout_text.append(buf, static_cast<std::size_t>(got));
  }
  close(fds[0]);

  int status = 0;
  if (!result.timed_out && timeout_s > 0) {
    // stdout closed; the process may still be running.
    while (true) {
      const pid_t w = waitpid(pid, &status, WNOHANG);
      if (w == pid) break;
      if (w < 0 && errno != EINTR) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        result.timed_out = true;
        break;
      }
      usleep(1000);
    }
    if (!result.timed_out) {
      result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status)
                                           : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
      return result;
    }
  }
  if (result.timed_out && kill(-pid, SIGKILL) != 0) kill(pid, SIGKILL);
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  else result.exit_code = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  return result;
}

ExternalTarget::ExternalTarget(ParameterSpace space, std::string command, double timeout_s)
    : space_(std::move(space)), timeout_s_(timeout_s) {
  std::istringstream is(command);
  for (std::string tok; is >> tok;) command_.push_back(tok);
  if (command_.empty()) throw std::invalid_argument("external target: empty command");
}

std::vector<std::string> ExternalTarget::command_line(const Configuration& config,
                                                      const Instance& instance,
                                                      std::uint64_t seed) const {
  std::vector<std::string> argv = command_;
  argv.push_back(instance.path.empty() ? instance.id : instance.path);
  argv.push_back(std::to_string(seed));
  for (std::size_t i = 0; i < space_.size(); ++i) {
    if (!is_active(config.values.at(i))) continue;
    argv.push_back("--" + space_[i].name);
    argv.push_back(format_value(space_[i], config.values[i]));
  }
  return argv;
}

EvalResult ExternalTarget::evaluate(const Configuration& config, const Instance& instance,
                                    std::uint64_t seed) const {
  const auto proc = run_process(command_line(config, instance, seed), timeout_s_);
  EvalResult r;
  r.runtime_s = proc.runtime_s;
  if (proc.timed_out) {
    r.status = EvalStatus::timeout;
    r.message = "exceeded " + format_real(timeout_s_) + " s";
    return r;
  }
  if (proc.exit_code != 0) {
    r.status = EvalStatus::crashed;
    r.message = "exit code " + std::to_string(proc.exit_code);
    return r;
  }
  if (auto cost = parse_cost_output(proc.stdout_text)) {
    r.cost = *cost;
    return r;
  }
  r.status = EvalStatus::crashed;
  r.message = "no cost on the last output line";
  return r;
}

}  // namespace racetune
