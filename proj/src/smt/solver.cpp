#include "solbmc/smt.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace solbmc::smt {

namespace fs = std::filesystem;

std::string resolve_solver_path(const std::string& path)
{
  std::string p = path;
  if (p.empty()) {
    if (const char* env = std::getenv("SOLBMC_SOLVER"); env && *env)
      p = env;
    else
      p = "z3";
  }
  if (p.find('/') != std::string::npos)
    return p;
  if (const char* env = std::getenv("PATH")) {
    std::string dirs = env;
    std::size_t start = 0;
    while (start <= dirs.size()) {
      std::size_t end = dirs.find(':', start);
      if (end == std::string::npos)
        end = dirs.size();
      fs::path cand = fs::path(dirs.substr(start, end - start)) / p;
      if (::access(cand.c_str(), X_OK) == 0)
        return cand.string();
      start = end + 1;
    }
  }
  return p;
}

std::vector<std::string> default_solver_args(const std::string& path)
{
  std::string base = fs::path(path).filename().string();
  if (base.rfind("z3", 0) == 0)
    return {"-in", "-smt2"};
  if (base.rfind("cvc5", 0) == 0 || base.rfind("cvc4", 0) == 0)
    return {"--lang=smt2", "--incremental"};
  if (base.rfind("yices", 0) == 0)
    return {"--incremental"};
  return {};
}

SolverProcess::SolverProcess(const std::string& path, const std::vector<std::string>& args)
{
  std::signal(SIGPIPE, SIG_IGN);
  int toChild[2], fromChild[2];
  if (::pipe(toChild) != 0)
    throw SolverProcessError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(fromChild) != 0) {
    ::close(toChild[0]);
    ::close(toChild[1]);
    throw SolverProcessError(std::string("pipe: ") + std::strerror(errno));
  }
  // report exec failures through a close-on-exec pipe
  int errPipe[2];
  if (::pipe2(errPipe, O_CLOEXEC) != 0)
    throw SolverProcessError(std::string("pipe: ") + std::strerror(errno));

  std::vector<std::string> argv{path};
  argv.insert(argv.end(), args.begin(), args.end());
  std::vector<char*> cargv;
  for (auto& a : argv)
    cargv.push_back(a.data());
  cargv.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0)
    throw SolverProcessError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(toChild[0], 0);
    ::dup2(fromChild[1], 1);
    ::dup2(fromChild[1], 2);
    ::close(toChild[0]);
    ::close(toChild[1]);
    ::close(fromChild[0]);
    ::close(fromChild[1]);
    ::close(errPipe[0]);
    ::execvp(cargv[0], cargv.data());
    int e = errno;
    (void)!::write(errPipe[1], &e, sizeof e);
    ::_exit(127);
  }
  ::close(toChild[0]);
  ::close(fromChild[1]);
  ::close(errPipe[1]);
  int e = 0;
  ssize_t n = ::read(errPipe[0], &e, sizeof e);
  ::close(errPipe[0]);
  pid_ = pid;
  in_ = toChild[1];
  out_ = fromChild[0];
  if (n == sizeof e) {
    kill();
    throw SolverProcessError("cannot run solver '" + path + "': " + std::strerror(e));
  }
  ::fcntl(out_, F_SETFL, ::fcntl(out_, F_GETFL) | O_NONBLOCK);
  ::fcntl(in_, F_SETFL, ::fcntl(in_, F_GETFL) | O_NONBLOCK);
}

SolverProcess::~SolverProcess() { kill(); }

void SolverProcess::kill()
{
  if (in_ >= 0)
    ::close(in_);
  if (out_ >= 0)
    ::close(out_);
  in_ = out_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
}

namespace {

int millis_until(SolverProcess::Clock::time_point deadline)
{
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - SolverProcess::Clock::now()).count();
  if (left <= 0)
    return 0;
  return left > 1000 ? 1000 : static_cast<int>(left);
}

} // namespace

void SolverProcess::send(std::string_view text, Clock::time_point deadline)
{
  std::size_t done = 0;
  while (done < text.size()) {
    if (in_ < 0)
      throw SolverProcessError("solver process is not running");
    ssize_t n = ::write(in_, text.data() + done, text.size() - done);
    if (n > 0) {
      done += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
      std::string msg = "solver closed its input";
      // surface whatever the solver printed before dying
      if (auto r = read_response(Clock::now() + std::chrono::milliseconds(200)))
        msg += ": " + *r;
      kill();
      throw SolverProcessError(msg);
    }
    if (Clock::now() >= deadline)
      throw SolverProcessError("timed out writing to the solver");
    // drain output so the child never blocks on a full pipe
    pollfd fds[2] = {{in_, POLLOUT, 0}, {out_, POLLIN, 0}};
    ::poll(fds, 2, millis_until(deadline));
    if (fds[1].revents & POLLIN) {
      char buf[4096];
      ssize_t r = ::read(out_, buf, sizeof buf);
      if (r > 0)
        buffer_.append(buf, static_cast<std::size_t>(r));
    }
  }
}

std::optional<std::string> SolverProcess::read_response(Clock::time_point deadline)
{
  for (;;) {
    // skip leading whitespace, then look for one complete response
    std::size_t start = buffer_.find_first_not_of(" \t\r\n");
    if (start != std::string::npos) {
      std::string_view rest(buffer_);
      rest.remove_prefix(start);
      if (rest.front() == '(') {
        int depth = 0;
        bool bar = false, str = false;
        for (std::size_t i = 0; i < rest.size(); ++i) {
          char c = rest[i];
          if (bar) {
            bar = c != '|';
            continue;
          }
          if (str) {
            str = c != '"';
            continue;
          }
          if (c == '|')
            bar = true;
          else if (c == '"')
            str = true;
          else if (c == '(')
            ++depth;
          else if (c == ')' && --depth == 0) {
            std::string out(rest.substr(0, i + 1));
            buffer_.erase(0, start + i + 1);
            return out;
          }
        }
      } else {
        auto nl = rest.find('\n');
        if (nl != std::string_view::npos) {
          std::string out(rest.substr(0, nl));
          while (!out.empty() && (out.back() == '\r' || out.back() == ' '))
            out.pop_back();
          buffer_.erase(0, start + nl + 1);
          return out;
        }
      }
    }
    if (out_ < 0)
      throw SolverProcessError("solver process is not running");
    if (Clock::now() >= deadline)
      return std::nullopt;
    pollfd fd{out_, POLLIN, 0};
    int rc = ::poll(&fd, 1, millis_until(deadline));
    if (rc < 0 && errno != EINTR)
      throw SolverProcessError(std::string("poll: ") + std::strerror(errno));
    if (rc > 0) {
      char buf[8192];
      ssize_t n = ::read(out_, buf, sizeof buf);
      if (n > 0) {
        buffer_.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0) {
        std::string tail = buffer_;
        kill();
        if (!tail.empty() && tail.find_first_not_of(" \t\r\n") != std::string::npos) {
          buffer_.clear();
          return tail;
        }
        throw SolverProcessError("solver exited unexpectedly");
      }
    }
  }
}

} // namespace solbmc::smt
