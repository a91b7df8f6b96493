#include "subprocess.hpp"

#include "qsic/error.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace qsic {

namespace {

[[noreturn]] void io_error(const std::string &what) {
  throw Error(ErrorKind::Io, what + ": " + std::strerror(errno));
}

struct Fd {
  int fd = -1;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0)
      ::close(fd);
    fd = -1;
  }
};

void make_pipe(Fd &r, Fd &w) {
  int p[2];
  if (::pipe2(p, O_CLOEXEC) != 0)
    io_error("pipe");
  r.fd = p[0];
  w.fd = p[1];
}

} // namespace

ProcessResult run_process(const std::vector<std::string> &argv,
                          const std::optional<std::string> &stdin_text, double timeout) {
  if (argv.empty())
    throw Error(ErrorKind::InvalidArgument, "empty solver command");
  Fd in_r, in_w, out_r, out_w, err_r, err_w, exec_r, exec_w;
  make_pipe(out_r, out_w);
  make_pipe(err_r, err_w);
  make_pipe(exec_r, exec_w); // carries errno if exec fails
  if (stdin_text) {
    make_pipe(in_r, in_w);
    // a solver that exits without reading its input must not kill us
    struct sigaction old {};
    if (::sigaction(SIGPIPE, nullptr, &old) == 0 && old.sa_handler == SIG_DFL)
      ::signal(SIGPIPE, SIG_IGN);
  }

  std::vector<char *> args;
  for (const std::string &a : argv)
    args.push_back(const_cast<char *>(a.c_str()));
  args.push_back(nullptr);

  const auto t0 = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0)
    io_error("fork");
  if (pid == 0) {
    ::setpgid(0, 0);
    int in = stdin_text ? in_r.fd : ::open("/dev/null", O_RDONLY);
    ::dup2(in, 0);
    ::dup2(out_w.fd, 1);
    ::dup2(err_w.fd, 2);
    ::execvp(args[0], args.data());
    const int e = errno;
    (void)!::write(exec_w.fd, &e, sizeof e);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  exec_w.reset();
  out_w.reset();
  err_w.reset();
  in_r.reset();

  int exec_errno = 0;
  if (::read(exec_r.fd, &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    ::waitpid(pid, nullptr, 0);
    errno = exec_errno;
    throw Error(ErrorKind::SolverNotFound,
                "cannot run '" + argv[0] + "': " + std::strerror(exec_errno));
  }

  ProcessResult res;
  std::size_t written = 0;
  if (!stdin_text || stdin_text->empty())
    in_w.reset();
  else
    ::fcntl(in_w.fd, F_SETFL, ::fcntl(in_w.fd, F_GETFL) | O_NONBLOCK);
  const auto deadline = t0 + std::chrono::duration<double>(timeout);
  char buf[65536];
  while (out_r.fd >= 0 || err_r.fd >= 0) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      res.timed_out = true;
      ::kill(-pid, SIGKILL);
      break;
    }
    pollfd fds[3];
    int n = 0;
    for (Fd *f : {&out_r, &err_r})
      if (f->fd >= 0)
        fds[n++] = {f->fd, POLLIN, 0};
    if (in_w.fd >= 0)
      fds[n++] = {in_w.fd, POLLOUT, 0};
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    const int rc = ::poll(fds, static_cast<nfds_t>(n), static_cast<int>(std::min<long long>(ms + 1, 1000)));
    if (rc < 0) {
      if (errno == EINTR)
        continue;
      io_error("poll");
    }
    for (int i = 0; i < n; ++i) {
      if (!fds[i].revents)
        continue;
      if (fds[i].fd == in_w.fd) {
        const ssize_t k = ::write(in_w.fd, stdin_text->data() + written, stdin_text->size() - written);
        if (k < 0 && errno != EAGAIN && errno != EINTR) {
          in_w.reset(); // solver closed its stdin
          continue;
        }
        if (k > 0)
          written += static_cast<std::size_t>(k);
        if (written == stdin_text->size())
          in_w.reset();
        continue;
      }
      Fd &f = fds[i].fd == out_r.fd ? out_r : err_r;
      const ssize_t k = ::read(f.fd, buf, sizeof buf);
      if (k > 0)
        (&f == &out_r ? res.out : res.err).append(buf, static_cast<std::size_t>(k));
      else if (k == 0 || (errno != EAGAIN && errno != EINTR))
        f.reset();
    }
  }
  in_w.reset();
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (WIFSIGNALED(status))
    res.signaled = true;
  else if (WIFEXITED(status))
    res.exit_code = WEXITSTATUS(status);
  return res;
}

} // namespace qsic
